use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::loss::{inverse_loss, steady_state_batch_loss, transient_batch_loss, SampleLoss};
use super::{BatchSampler, EpochRecord, Result, RunRecord, SolverFamily, Surrogate, TrainingError};
use crate::network::{LrSchedule, Optimizer, OptimizerConfig};
use crate::numerics::StateVector;
use crate::solvers::Solver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UpdateGranularity {
    /// Average the batch, then one optimizer step.
    #[default]
    PerEpoch,
    /// One optimizer step after every sample of the batch.
    PerSample,
}

impl UpdateGranularity {
    fn label(self) -> &'static str {
        match self {
            UpdateGranularity::PerEpoch => "per_epoch",
            UpdateGranularity::PerSample => "per_sample",
        }
    }
}

/// An epoch draws `batch_size` parameter samples from a seeded shuffle of the
/// training set and applies the optimizer according to `granularity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(default)]
    pub granularity: UpdateGranularity,
    pub optimizer: OptimizerConfig,
    pub schedule: LrSchedule,
    pub seed: u64,
}

impl TrainingConfig {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(TrainingError::InvalidTask("batch size must be ≥ 1".into()));
        }
        self.schedule.validate()?;
        if self.epochs > 0 && self.schedule.total() + 1 < self.epochs {
            return Err(TrainingError::InvalidTask(format!(
                "schedule covers {} steps but {} epochs requested",
                self.schedule.total(),
                self.epochs
            )));
        }
        Ok(())
    }
}

/// Training stopped early; carries the epochs completed so far.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainAbort {
    pub record: RunRecord,
    pub error: TrainingError,
}

impl std::fmt::Display for TrainAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "training aborted after {} epochs: {}", self.record.epochs.len(), self.error)
    }
}

impl std::error::Error for TrainAbort {}

pub type InitialCondition = Arc<dyn Fn(&[f64]) -> StateVector + Send + Sync>;

pub struct SteadyTask {
    pub surrogate: Surrogate,
    pub family: SolverFamily,
    pub train_params: Vec<Vec<f64>>,
    /// Solver steps per loss evaluation.
    pub steps: usize,
    pub config: TrainingConfig,
}

pub struct TransientTask {
    pub surrogate: Surrogate,
    pub family: SolverFamily,
    pub initial: InitialCondition,
    /// Network time levels `t_0 < … < t_{N_t}`.
    pub times: Vec<f64>,
    /// Solver steps between consecutive levels.
    pub steps: usize,
    pub train_params: Vec<Vec<f64>>,
    pub config: TrainingConfig,
    /// Weight of the initial-condition term; 1 gives the plain sum.
    pub ic_weight: f64,
}

impl TransientTask {
    fn validate(&self) -> Result<()> {
        check_common(&self.surrogate, &self.train_params, &self.config)?;
        if !(self.ic_weight.is_finite() && self.ic_weight > 0.0) {
            return Err(TrainingError::InvalidTask(format!("ic weight must be positive, got {}", self.ic_weight)));
        }
        if self.times.len() < 2 {
            return Err(TrainingError::InvalidTask("need at least two time levels".into()));
        }
        let dt = self.family.get(&self.train_params[0])?.time_step();
        for w in self.times.windows(2) {
            let gap = w[1] - w[0];
            if (self.steps as f64 * dt - gap).abs() > 1e-12 {
                return Err(TrainingError::InvalidTask(format!(
                    "{} solver steps of {dt} do not span the level gap {gap}",
                    self.steps
                )));
            }
        }
        Ok(())
    }
}

/// One learnable entry of the physical-parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSpec {
    pub index: usize,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
}

pub struct InverseTask {
    pub forward: TransientTask,
    pub observation_times: Vec<f64>,
    pub observations: Vec<StateVector>,
    /// Parameters of the observed system; entries named in `beta` are unknown.
    pub known_params: Vec<f64>,
    pub beta: Vec<BetaSpec>,
    pub inverse_lr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseOutcome {
    pub record: RunRecord,
    pub beta: Vec<f64>,
}

fn check_common(s: &Surrogate, params: &[Vec<f64>], config: &TrainingConfig) -> Result<()> {
    config.validate()?;
    if params.is_empty() {
        return Err(TrainingError::InvalidTask("empty training set".into()));
    }
    if let Some(p) = params.iter().find(|p| p.len() != s.param_dim()) {
        return Err(TrainingError::InvalidTask(format!(
            "training sample {p:?} does not have {} entries",
            s.param_dim()
        )));
    }
    Ok(())
}

struct EpochLosses {
    ic: f64,
    solver: f64,
}

/// Forward part of one epoch: batch losses and θ updates.
fn forward_epoch(
    surrogate: &mut Surrogate,
    optimizer: &mut Optimizer,
    config: &TrainingConfig,
    batch: &[usize],
    lr: f64,
    mut batch_loss: impl FnMut(&Surrogate, &[usize]) -> Result<SampleLoss>,
) -> Result<EpochLosses> {
    let mut ic = 0.0;
    let mut solver = 0.0;
    match config.granularity {
        UpdateGranularity::PerEpoch => {
            let l = batch_loss(surrogate, batch)?;
            ic = l.ic;
            solver = l.solver;
            optimizer.step(surrogate.net_mut().params_mut(), &l.grad, lr)?;
        }
        UpdateGranularity::PerSample => {
            let w = 1.0 / batch.len() as f64;
            for &i in batch {
                let l = batch_loss(surrogate, &[i])?;
                ic += w * l.ic;
                solver += w * l.solver;
                optimizer.step(surrogate.net_mut().params_mut(), &l.grad, lr)?;
            }
        }
    }
    Ok(EpochLosses { ic, solver })
}

struct Looper {
    record: RunRecord,
    sampler: BatchSampler,
    optimizer: Optimizer,
    start: Instant,
}

impl Looper {
    fn new(kind: &str, config: &TrainingConfig, samples: usize, params: usize) -> Self {
        Self {
            record: RunRecord::new(kind, config.seed, config.batch_size, config.granularity.label()),
            sampler: BatchSampler::new(samples, config.seed),
            optimizer: Optimizer::new(config.optimizer, params),
            start: Instant::now(),
        }
    }

    fn abort(mut self, error: TrainingError) -> TrainAbort {
        self.record.wall_clock_seconds = self.start.elapsed().as_secs_f64();
        self.record.aborted = Some(error.to_string());
        TrainAbort {
            record: self.record,
            error,
        }
    }

    fn finish(mut self) -> RunRecord {
        self.record.wall_clock_seconds = self.start.elapsed().as_secs_f64();
        self.record
    }
}

fn check_finite(epoch: usize, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(TrainingError::NonFiniteLoss { epoch, value })
    }
}

/// Steady training: fixed-point consistency `f(α) ≈ S[f(α)]`.
pub fn train_steady(task: &mut SteadyTask, observer: &mut dyn FnMut(&EpochRecord)) -> std::result::Result<RunRecord, TrainAbort> {
    let config = task.config.clone();
    let mut looper = Looper::new("steady", &config, task.train_params.len(), task.surrogate.net().parameter_count());
    if let Err(e) = check_common(&task.surrogate, &task.train_params, &config) {
        return Err(looper.abort(e));
    }
    for epoch in 0..config.epochs {
        let step = (|| -> Result<EpochRecord> {
            let lr = config.schedule.rate(epoch)?;
            let batch = looper.sampler.next_batch(config.batch_size);
            let (family, params, steps) = (&task.family, &task.train_params, task.steps);
            let l = forward_epoch(&mut task.surrogate, &mut looper.optimizer, &config, &batch, lr, |s, idx| {
                let solvers = solvers_for(family, params, idx)?;
                let samples: Vec<(&[f64], &dyn Solver)> =
                    idx.iter().zip(&solvers).map(|(&i, sv)| (params[i].as_slice(), sv.as_ref())).collect();
                steady_state_batch_loss(s, &samples, steps)
            })?;
            check_finite(epoch, l.solver)?;
            Ok(EpochRecord {
                epoch,
                loss_total: l.solver,
                loss_ic: 0.0,
                loss_solver: l.solver,
                loss_inverse: None,
                beta: Vec::new(),
                lr,
            })
        })();
        match step {
            Ok(rec) => {
                observer(&rec);
                looper.record.epochs.push(rec);
            }
            Err(e) => return Err(looper.abort(e)),
        }
    }
    Ok(looper.finish())
}

fn transient_epoch(
    task: &mut TransientTask,
    optimizer: &mut Optimizer,
    config: &TrainingConfig,
    batch: &[usize],
    lr: f64,
) -> Result<EpochLosses> {
    let (family, params, steps, times, initial, ic_weight) =
        (&task.family, &task.train_params, task.steps, &task.times, &task.initial, task.ic_weight);
    forward_epoch(&mut task.surrogate, optimizer, config, batch, lr, |s, idx| {
        let solvers = solvers_for(family, params, idx)?;
        let initials: Vec<StateVector> = idx.iter().map(|&i| initial(&params[i])).collect();
        let samples: Vec<(&[f64], &dyn Solver, &StateVector)> = idx
            .iter()
            .zip(&solvers)
            .zip(&initials)
            .map(|((&i, sv), u0)| (params[i].as_slice(), sv.as_ref(), u0))
            .collect();
        transient_batch_loss(s, &samples, times, steps, ic_weight)
    })
}

fn solvers_for(family: &SolverFamily, params: &[Vec<f64>], idx: &[usize]) -> Result<Vec<Arc<dyn Solver>>> {
    idx.iter()
        .map(|&i| {
            family.get(&params[i]).map_err(|source| TrainingError::Solver {
                params: params[i].clone(),
                level: 0,
                source,
            })
        })
        .collect()
}

/// Transient training: initial condition plus one-step solver consistency.
pub fn train_transient(
    task: &mut TransientTask,
    observer: &mut dyn FnMut(&EpochRecord),
) -> std::result::Result<RunRecord, TrainAbort> {
    let config = task.config.clone();
    let mut looper = Looper::new("transient", &config, task.train_params.len(), task.surrogate.net().parameter_count());
    if let Err(e) = task.validate() {
        return Err(looper.abort(e));
    }
    for epoch in 0..config.epochs {
        let step = (|| -> Result<EpochRecord> {
            let lr = config.schedule.rate(epoch)?;
            let batch = looper.sampler.next_batch(config.batch_size);
            let l = transient_epoch(task, &mut looper.optimizer, &config, &batch, lr)?;
            let total = task.ic_weight * l.ic + l.solver;
            check_finite(epoch, total)?;
            Ok(EpochRecord {
                epoch,
                loss_total: total,
                loss_ic: l.ic,
                loss_solver: l.solver,
                loss_inverse: None,
                beta: Vec::new(),
                lr,
            })
        })();
        match step {
            Ok(rec) => {
                observer(&rec);
                looper.record.epochs.push(rec);
            }
            Err(e) => return Err(looper.abort(e)),
        }
    }
    Ok(looper.finish())
}

impl InverseTask {
    /// Per-entry affine map from β to the network's normalized input.
    fn beta_maps(&self) -> Result<Vec<(f64, f64)>> {
        let map = self.forward.surrogate.net().input_map();
        let offset = self.forward.surrogate.time_input() as usize;
        self.beta
            .iter()
            .map(|b| {
                let c = offset + b.index;
                let (scale, shift) = (map.scale[c], map.shift[c]);
                if scale == 0.0 {
                    return Err(TrainingError::InvalidTask(format!("β entry {} has a degenerate input range", b.index)));
                }
                Ok((scale, shift))
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        self.forward.validate()?;
        if self.known_params.len() != self.forward.surrogate.param_dim() {
            return Err(TrainingError::InvalidTask("known parameters have the wrong length".into()));
        }
        for b in &self.beta {
            if b.index >= self.known_params.len() || !(b.lower <= b.initial && b.initial <= b.upper) {
                return Err(TrainingError::InvalidTask(format!("bad β spec {b:?}")));
            }
        }
        if !(self.inverse_lr.is_finite() && self.inverse_lr > 0.0) {
            return Err(TrainingError::InvalidTask("inverse learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Alternates a transient θ update with an Adam step on β.
///
/// β is optimized in the network's normalized input coordinates and clamped
/// to its interval after every step.
pub fn train_inverse(
    task: &mut InverseTask,
    observer: &mut dyn FnMut(&EpochRecord),
) -> std::result::Result<InverseOutcome, TrainAbort> {
    let config = task.forward.config.clone();
    let params = task.forward.surrogate.net().parameter_count();
    let mut looper = Looper::new("inverse", &config, task.forward.train_params.len(), params);
    let maps = match task.validate().and_then(|_| task.beta_maps()) {
        Ok(m) => m,
        Err(e) => return Err(looper.abort(e)),
    };
    let to_z = |i: usize, b: f64| maps[i].0 * b + maps[i].1;
    let from_z = |i: usize, z: f64| (z - maps[i].1) / maps[i].0;
    let bounds: Vec<(f64, f64)> = task
        .beta
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let (a, c) = (to_z(i, b.lower), to_z(i, b.upper));
            (a.min(c), a.max(c))
        })
        .collect();
    let mut z: Vec<f64> = task.beta.iter().enumerate().map(|(i, b)| to_z(i, b.initial)).collect();
    let mut beta_opt = Optimizer::new(OptimizerConfig::adam(), z.len());
    let current = |z: &[f64]| -> Vec<f64> { z.iter().enumerate().map(|(i, v)| from_z(i, *v)).collect() };
    for epoch in 0..config.epochs {
        let step = (|| -> Result<EpochRecord> {
            let lr = config.schedule.rate(epoch)?;
            let batch = looper.sampler.next_batch(config.batch_size);
            let l = transient_epoch(&mut task.forward, &mut looper.optimizer, &config, &batch, lr)?;
            let mut p = task.known_params.clone();
            let beta = current(&z);
            for (b, v) in task.beta.iter().zip(&beta) {
                p[b.index] = *v;
            }
            let inv = inverse_loss(&task.forward.surrogate, &p, &task.observation_times, &task.observations)?;
            let gz: Vec<f64> = task
                .beta
                .iter()
                .enumerate()
                .map(|(i, b)| inv.input_grad[b.index] / maps[i].0)
                .collect();
            beta_opt.step(&mut z, &gz, task.inverse_lr)?;
            for (v, (lo, hi)) in z.iter_mut().zip(&bounds) {
                *v = v.clamp(*lo, *hi);
            }
            let total = task.forward.ic_weight * l.ic + l.solver;
            check_finite(epoch, total)?;
            check_finite(epoch, inv.value)?;
            Ok(EpochRecord {
                epoch,
                loss_total: total,
                loss_ic: l.ic,
                loss_solver: l.solver,
                loss_inverse: Some(inv.value),
                beta: current(&z),
                lr,
            })
        })();
        match step {
            Ok(rec) => {
                observer(&rec);
                looper.record.epochs.push(rec);
            }
            Err(e) => return Err(looper.abort(e)),
        }
    }
    let beta = current(&z);
    Ok(InverseOutcome {
        record: looper.finish(),
        beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{AffineMap, Mlp, NetworkConfig};
    use crate::numerics::Grid;
    use crate::solvers::{LinearOdeEuler, Solver};
    use crate::training::SurrogateLayout;

    fn config(epochs: usize, lr: f64) -> TrainingConfig {
        TrainingConfig {
            epochs,
            batch_size: 4,
            granularity: UpdateGranularity::PerEpoch,
            optimizer: OptimizerConfig::adam(),
            schedule: LrSchedule::Constant { base: lr, total: epochs },
            seed: 1,
        }
    }

    fn net(input: usize, seed: u64) -> Mlp {
        Mlp::new(NetworkConfig {
            input_dim: input,
            output_dim: 1,
            hidden_layers: 2,
            hidden_width: 16,
            activation: Default::default(),
            init: Default::default(),
            seed,
        })
        .unwrap()
    }

    fn decay_family() -> SolverFamily {
        SolverFamily::new(|p| Ok(Arc::new(LinearOdeEuler::new(p[0], 1.0, 0.05)?) as Arc<dyn Solver>))
    }

    fn steady_task(epochs: usize) -> SteadyTask {
        let map = AffineMap::to_unit_interval(&[(0.5, 2.0)]);
        let net = net(1, 3).with_input_map(map).unwrap();
        let surrogate = Surrogate::new(net, Grid::Point, 1, SurrogateLayout::WholeState, false, 1, None).unwrap();
        SteadyTask {
            surrogate,
            family: decay_family(),
            train_params: (0..8).map(|i| vec![0.5 + 0.2 * i as f64]).collect(),
            steps: 5,
            config: config(epochs, 1e-2),
        }
    }

    #[test]
    fn zero_epochs_leave_network_unchanged() {
        let mut t = steady_task(0);
        let before = t.surrogate.clone();
        let r = train_steady(&mut t, &mut |_| {}).unwrap();
        assert!(r.epochs.is_empty());
        assert_eq!(t.surrogate, before);
    }

    #[test]
    fn steady_learns_the_equilibrium() {
        let mut t = steady_task(1500);
        let r = train_steady(&mut t, &mut |_| {}).unwrap();
        assert_eq!(r.epochs.len(), 1500);
        let means: Vec<f64> = r.epochs.chunks(100).map(|c| c.iter().map(|e| e.loss_total).sum::<f64>() / 100.0).collect();
        assert!(means[means.len() - 1] < means[0] / 100.0, "{means:?}");
        for alpha in [0.6, 1.0, 1.7] {
            let y = t.surrogate.predict(0.0, &[alpha]).unwrap().values()[0];
            assert!((y - 1.0 / alpha).abs() < 0.05, "alpha {alpha}: {y}");
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let mut a = steady_task(30);
        let mut b = steady_task(30);
        let ra = train_steady(&mut a, &mut |_| {}).unwrap();
        let rb = train_steady(&mut b, &mut |_| {}).unwrap();
        assert_eq!(ra.metrics_csv(), rb.metrics_csv());
        assert_eq!(a.surrogate, b.surrogate);
    }

    #[test]
    fn per_sample_granularity_steps_per_sample() {
        let mut t = steady_task(3);
        t.config.granularity = UpdateGranularity::PerSample;
        let mut b = steady_task(3);
        train_steady(&mut t, &mut |_| {}).unwrap();
        train_steady(&mut b, &mut |_| {}).unwrap();
        assert_ne!(t.surrogate, b.surrogate);
    }

    fn transient_task(epochs: usize) -> TransientTask {
        let map = AffineMap::to_unit_interval(&[(0.0, 1.0), (0.5, 1.5)]);
        let net = net(2, 5).with_input_map(map).unwrap();
        let surrogate = Surrogate::new(net, Grid::Point, 1, SurrogateLayout::WholeState, true, 1, None).unwrap();
        TransientTask {
            surrogate,
            family: SolverFamily::new(|p| Ok(Arc::new(LinearOdeEuler::new(p[0], 0.0, 0.01)?) as Arc<dyn Solver>)),
            initial: Arc::new(|_| StateVector::scalar(1.0)),
            times: (0..=10).map(|i| i as f64 * 0.1).collect(),
            steps: 10,
            train_params: (0..6).map(|i| vec![0.5 + 0.2 * i as f64]).collect(),
            config: config(epochs, 5e-3),
            ic_weight: 1.0,
        }
    }

    #[test]
    fn step_count_must_span_level_gap() {
        let mut t = transient_task(1);
        t.steps = 9;
        let err = train_transient(&mut t, &mut |_| {}).unwrap_err();
        assert!(matches!(err.error, TrainingError::InvalidTask(_)));
        assert!(err.record.epochs.is_empty());
    }

    #[test]
    fn single_interval_reduces_to_ic_plus_one_term() {
        let mut t = transient_task(1);
        t.times = vec![0.0, 0.1];
        let before = t.surrogate.clone();
        let r = train_transient(&mut t, &mut |_| {}).unwrap();
        let e = &r.epochs[0];
        assert_eq!(e.loss_total, e.loss_ic + e.loss_solver);
        let batch = BatchSampler::new(6, 1).next_batch(4);
        let mut ic = 0.0;
        let mut cons = 0.0;
        for i in batch {
            let a = t.train_params[i][0];
            let f0 = before.predict(0.0, &[a]).unwrap().values()[0];
            let f1 = before.predict(0.1, &[a]).unwrap().values()[0];
            let s = LinearOdeEuler::new(a, 0.0, 0.01).unwrap().apply(&StateVector::scalar(f0), 10).unwrap();
            ic += (f0 - 1.0).powi(2) / 4.0;
            cons += (f1 - s.values()[0]).powi(2) / 4.0;
        }
        assert!((e.loss_ic - ic).abs() < 1e-14);
        assert!((e.loss_solver - cons).abs() < 1e-14);
    }

    #[test]
    fn transient_training_tracks_decay() {
        let mut t = transient_task(2000);
        let r = train_transient(&mut t, &mut |_| {}).unwrap();
        assert!(r.final_loss().unwrap() < r.epochs[0].loss_total / 100.0);
        let y = t.surrogate.predict(1.0, &[1.0]).unwrap().values()[0];
        assert!((y - (-1.0f64).exp()).abs() < 0.05, "{y}");
    }

    #[test]
    fn solver_fault_aborts_with_partial_record() {
        let mut t = transient_task(5);
        t.family = SolverFamily::new(|p| {
            let rate = if p[0] > 1.0 { -1e306 } else { p[0] };
            Ok(Arc::new(LinearOdeEuler::new(rate, 0.0, 0.01)?) as Arc<dyn Solver>)
        });
        t.train_params = vec![vec![0.5], vec![1.2]];
        t.config.batch_size = 1;
        let err = train_transient(&mut t, &mut |_| {}).unwrap_err();
        assert!(matches!(err.error, TrainingError::SolverFault { .. }));
        assert!(err.record.epochs.len() < 5);
        assert!(err.record.aborted.is_some());
    }

    #[test]
    fn inverse_beta_stays_in_interval() {
        let forward = transient_task(50);
        let obs_times: Vec<f64> = forward.times[1..].to_vec();
        let observations = obs_times.iter().map(|t| StateVector::scalar((-3.0 * *t).exp())).collect();
        let mut task = InverseTask {
            forward,
            observation_times: obs_times,
            observations,
            known_params: vec![1.0],
            beta: vec![BetaSpec {
                index: 0,
                initial: 1.45,
                lower: 0.5,
                upper: 1.5,
            }],
            inverse_lr: 0.5,
        };
        let out = train_inverse(&mut task, &mut |_| {}).unwrap();
        for e in &out.record.epochs {
            assert!((0.5..=1.5).contains(&e.beta[0]), "{}", e.beta[0]);
            assert!(e.loss_inverse.is_some());
        }
        assert_eq!(out.beta, out.record.epochs.last().unwrap().beta);
    }
}
