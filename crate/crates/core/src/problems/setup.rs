use std::f64::consts::PI;
use std::sync::Arc;

use super::{metrics, ExperimentId, ExperimentSettings, ProblemError, ProblemKind, Result, ScheduleKind};
use crate::network::{AffineMap, LrSchedule, Mlp, NetworkConfig, OptimizerConfig};
use crate::numerics::{Grid, Grid1D, Grid2D, StateVector};
use crate::solvers::{
    allen_cahn_initial_state, allen_cahn_solver, boltzmann_equilibrium, ks_initial_state, ks_solver,
    linear_ode_analytic, FokkerPlanckFvm, FtcsBurgers, LinearOdeEuler, LorenzRk4, Solver,
    SpectralPdeConfig,
};
use crate::training::{
    add_observation_noise, train_inverse, train_steady, train_transient, BetaSpec, EpochRecord, InitialCondition,
    InverseTask, OutputConstraint, RunRecord, SolverFamily, SteadyTask, Surrogate, SurrogateLayout, TrainingConfig,
    TransientTask,
};

/// `lo, lo+step, …` up to `hi`, with values rounded to 12 decimals so grids
/// like 0.1, 0.2, … come out clean.
pub(crate) fn stepped(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect()
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

fn product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out
}

/// A resolved experiment: grids, training set and solver family.
#[derive(Clone)]
pub struct Problem {
    pub settings: ExperimentSettings,
    pub grid: Grid,
    pub field_count: usize,
    pub layout: SurrogateLayout,
    /// Network time levels; empty for steady problems.
    pub times: Vec<f64>,
    pub train_params: Vec<Vec<f64>>,
    pub param_ranges: Vec<(f64, f64)>,
    pub output_ranges: Vec<(f64, f64)>,
    pub constraint: Option<OutputConstraint>,
    family: SolverFamily,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem").field("experiment", &self.settings.experiment).finish()
    }
}

fn points_for(length: f64, dx: f64, closed: bool) -> Result<usize> {
    if !(dx.is_finite() && dx > 0.0) {
        return Err(ProblemError::Invalid(format!("dx must be positive, got {dx}")));
    }
    let cells = length / dx;
    let n = cells.round();
    if (cells - n).abs() > 1e-6 || n < 2.0 {
        return Err(ProblemError::Invalid(format!("dx = {dx} does not divide the domain length {length}")));
    }
    Ok(n as usize + closed as usize)
}

impl Problem {
    pub fn new(settings: ExperimentSettings) -> Result<Self> {
        use ExperimentId::*;
        let id = settings.experiment;
        let s = &settings.solver;
        if !(s.dt.is_finite() && s.dt > 0.0) || s.steps == 0 {
            return Err(ProblemError::Invalid("solver dt must be positive and steps ≥ 1".into()));
        }
        let t = &settings.training;
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if t.batch_size == 0 || !finite_pos(t.lr) || !finite_pos(t.ic_weight) {
            return Err(ProblemError::Invalid("batch size, lr and ic weight must be positive".into()));
        }
        if !(t.min_lr >= 0.0 && t.min_lr <= t.lr) || !(t.weight_decay >= 0.0 && t.weight_decay.is_finite()) {
            return Err(ProblemError::Invalid("need 0 ≤ min_lr ≤ lr and a finite weight decay ≥ 0".into()));
        }
        let spatial = !matches!(id, OdeForward | OdeInverse | LorenzForward);
        let dx = match (spatial, s.dx) {
            (true, Some(dx)) => dx,
            (true, None) => return Err(ProblemError::Invalid(format!("{id} needs solver.dx"))),
            (false, Some(_)) => return Err(ProblemError::Invalid(format!("{id} has no spatial grid; remove solver.dx"))),
            (false, None) => 0.0,
        };
        let (grid, dt_net, t_end) = match id {
            BurgersForward => (Grid::Line(Grid1D::new(-1.0, 1.0, points_for(2.0, dx, true)?, false)?), 0.1, 1.0),
            FokkerPlanckSteady => {
                let n = points_for(1.0, dx, false)?;
                (Grid::Plane(Grid2D::unit_square(n, n)?), 0.0, 0.0)
            }
            AllenCahnForward | AllenCahnInverse => {
                (Grid::Line(Grid1D::new(-1.0, 1.0, points_for(2.0, dx, false)?, true)?), 0.2, 1.0)
            }
            KsForward | KsInverse => (Grid::Line(Grid1D::new(0.0, 100.0, points_for(100.0, dx, false)?, true)?), 1.0, 20.0),
            OdeForward => (Grid::Point, 0.1, 10.0),
            OdeInverse => (Grid::Point, 0.1, 4.0),
            LorenzForward => (Grid::Point, 0.01, 3.0),
        };
        let times = if id.kind() == ProblemKind::Steady {
            Vec::new()
        } else {
            let span = s.steps as f64 * s.dt;
            if (span - dt_net).abs() > 1e-12 {
                return Err(ProblemError::Invalid(format!(
                    "{} solver steps of {} give {span}, but the network level spacing is {dt_net}",
                    s.steps, s.dt
                )));
            }
            let levels = (t_end / dt_net).round() as usize;
            (0..=levels).map(|n| n as f64 * dt_net).collect()
        };
        let (train_params, param_ranges): (Vec<Vec<f64>>, Vec<(f64, f64)>) = match id {
            BurgersForward => (product(&[stepped(0.01, 0.05, 0.01)]), vec![(0.01, 0.05)]),
            FokkerPlanckSteady => (product(&[linspace(1.0, 2.0, 256)]), vec![(1.0, 2.0)]),
            AllenCahnForward | AllenCahnInverse => (product(&[stepped(1e-4, 1e-3, 1e-4)]), vec![(1e-4, 1e-3)]),
            KsForward | KsInverse => (product(&[stepped(1.0, 1.5, 0.05)]), vec![(1.0, 1.5)]),
            OdeForward => (
                product(&[stepped(0.1, 1.0, 0.1), stepped(1.0, 5.0, 0.5)]),
                vec![(0.1, 1.0), (1.0, 5.0)],
            ),
            OdeInverse => (
                product(&[stepped(0.1, 1.0, 0.3), stepped(-3.0, 0.0, 0.5), stepped(0.0, 3.0, 0.5)]),
                vec![(0.1, 1.0), (-3.0, 0.0), (0.0, 3.0)],
            ),
            LorenzForward => (vec![Vec::new()], Vec::new()),
        };
        let (field_count, layout, output_ranges, constraint) = match id {
            BurgersForward | AllenCahnForward | AllenCahnInverse => (1, SurrogateLayout::Pointwise, vec![(-1.0, 1.0)], None),
            KsForward | KsInverse => (1, SurrogateLayout::Pointwise, vec![(-3.0, 3.0)], None),
            FokkerPlanckSteady => (
                1,
                SurrogateLayout::WholeState,
                vec![(-1.0, 1.0); grid.point_count()],
                Some(OutputConstraint::FixedMean { mean: 1.0 }),
            ),
            OdeForward => (1, SurrogateLayout::WholeState, vec![(0.0, 5.0)], None),
            OdeInverse => (1, SurrogateLayout::WholeState, vec![(-10.0, 3.0)], None),
            LorenzForward => (
                3,
                SurrogateLayout::WholeState,
                vec![(-20.0, 20.0), (-25.0, 25.0), (0.0, 50.0)],
                None,
            ),
        };
        let family = family_for(id, &grid, s.dt)?;
        if let Some(inv) = &settings.inverse {
            if id.kind() != ProblemKind::Inverse {
                return Err(ProblemError::Invalid(format!("{id} takes no [inverse] section")));
            }
            if inv.truth.len() != param_ranges.len() || inv.initial.len() != id.beta_indices().len() {
                return Err(ProblemError::Invalid(format!(
                    "{id} expects {} truth values and {} initial guesses",
                    param_ranges.len(),
                    id.beta_indices().len()
                )));
            }
            for (&i, &b0) in id.beta_indices().iter().zip(&inv.initial) {
                let (lo, hi) = param_ranges[i];
                if !(lo..=hi).contains(&b0) || !(lo..=hi).contains(&inv.truth[i]) {
                    return Err(ProblemError::Invalid(format!(
                        "{} must lie in [{lo}, {hi}]",
                        id.param_names()[i]
                    )));
                }
            }
            if !(inv.noise >= 0.0 && inv.noise.is_finite()) {
                return Err(ProblemError::Invalid("noise level must be ≥ 0".into()));
            }
        } else if id.kind() == ProblemKind::Inverse {
            return Err(ProblemError::Invalid(format!("{id} needs an [inverse] section")));
        }
        Ok(Self {
            settings,
            grid,
            field_count,
            layout,
            times,
            train_params,
            param_ranges,
            output_ranges,
            constraint,
            family,
        })
    }

    pub fn id(&self) -> ExperimentId {
        self.settings.experiment
    }

    pub fn time_input(&self) -> bool {
        !self.times.is_empty()
    }

    pub fn solver(&self, params: &[f64]) -> Result<Arc<dyn Solver>> {
        Ok(self.family.get(params)?)
    }

    fn input_ranges(&self) -> Vec<(f64, f64)> {
        let mut r = Vec::new();
        if let Some(t_end) = self.times.last() {
            r.push((0.0, *t_end));
        }
        r.extend(&self.param_ranges);
        if self.layout == SurrogateLayout::Pointwise {
            match &self.grid {
                Grid::Line(g) => r.push((g.x_min(), g.x_max())),
                Grid::Plane(g) => {
                    r.push(g.x_bounds());
                    r.push(g.y_bounds());
                }
                Grid::Point => {}
            }
        }
        r
    }

    pub fn network_config(&self) -> NetworkConfig {
        let n = &self.settings.network;
        NetworkConfig {
            input_dim: Surrogate::input_dim_for(self.layout, &self.grid, self.time_input(), self.param_ranges.len()),
            output_dim: Surrogate::output_dim_for(self.layout, &self.grid, self.field_count),
            hidden_layers: n.hidden_layers,
            hidden_width: n.hidden_width,
            activation: Default::default(),
            init: Default::default(),
            seed: self.settings.seed,
        }
    }

    /// Untrained surrogate with the preset's input and output maps.
    pub fn fresh_surrogate(&self) -> Result<Surrogate> {
        let net = Mlp::new(self.network_config())?
            .with_input_map(AffineMap::to_unit_interval(&self.input_ranges()))?
            .with_output_map(AffineMap::from_unit_interval(&self.output_ranges))?;
        self.surrogate_from_net(net)
    }

    /// Wrap a (checkpointed) network; fails if its shape does not fit.
    pub fn surrogate_from_net(&self, net: Mlp) -> Result<Surrogate> {
        Ok(Surrogate::new(
            net,
            self.grid,
            self.field_count,
            self.layout,
            self.time_input(),
            self.param_ranges.len(),
            self.constraint,
        )?)
    }

    pub fn training_config(&self) -> TrainingConfig {
        let t = &self.settings.training;
        let schedule = match t.schedule {
            ScheduleKind::Constant => LrSchedule::Constant {
                base: t.lr,
                total: t.epochs,
            },
            ScheduleKind::Cosine => LrSchedule::Cosine {
                base: t.lr,
                min: t.min_lr,
                total: t.epochs,
            },
        };
        TrainingConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            granularity: t.granularity,
            optimizer: OptimizerConfig {
                kind: t.optimizer,
                weight_decay: t.weight_decay,
                ..OptimizerConfig::adam()
            },
            schedule,
            seed: self.settings.seed,
        }
    }

    pub fn initial_state(&self, params: &[f64]) -> Result<StateVector> {
        use ExperimentId::*;
        let line = |g: &Grid| match g {
            Grid::Line(l) => *l,
            _ => unreachable!("line problems use a line grid"),
        };
        Ok(match self.id() {
            BurgersForward => {
                let g = line(&self.grid);
                let n = g.len();
                let values = g
                    .points()
                    .iter()
                    .enumerate()
                    .map(|(i, x)| if i == 0 || i == n - 1 { 0.0 } else { -(PI * x).sin() })
                    .collect();
                StateVector::new(self.grid, 1, values)?
            }
            AllenCahnForward | AllenCahnInverse => allen_cahn_initial_state(&line(&self.grid)),
            KsForward | KsInverse => ks_initial_state(&line(&self.grid)),
            OdeForward => StateVector::scalar(params[1]),
            OdeInverse => StateVector::scalar(params[2]),
            LorenzForward => StateVector::new(Grid::Point, 3, vec![10.0, 10.0, 10.0])?,
            FokkerPlanckSteady => return Err(ProblemError::Invalid("steady problems have no initial condition".into())),
        })
    }

    fn initial_condition(&self) -> InitialCondition {
        let p = self.clone();
        Arc::new(move |params: &[f64]| p.initial_state(params).expect("initial state of a validated problem"))
    }

    /// Reference solution at time `t`: analytic where available, otherwise
    /// the solver run from the true initial condition.
    pub fn reference(&self, params: &[f64], t: f64) -> Result<StateVector> {
        use ExperimentId::*;
        match self.id() {
            FokkerPlanckSteady => match &self.grid {
                Grid::Plane(g) => Ok(boltzmann_equilibrium(params[0], g)?),
                _ => unreachable!(),
            },
            OdeForward => Ok(StateVector::scalar(linear_ode_analytic(t, params[0], 0.0, params[1])?)),
            OdeInverse => Ok(StateVector::scalar(linear_ode_analytic(t, params[0], params[1], params[2])?)),
            _ => {
                let dt = self.settings.solver.dt;
                let n = (t / dt).round();
                if n < 0.0 || (n * dt - t).abs() > 1e-9 * t.abs().max(1.0) {
                    return Err(ProblemError::Invalid(format!("t = {t} is not a multiple of the solver step {dt}")));
                }
                Ok(self.solver(params)?.apply(&self.initial_state(params)?, n as usize)?)
            }
        }
    }

    /// References at every network level.
    pub fn reference_levels(&self, params: &[f64]) -> Result<Vec<StateVector>> {
        use ExperimentId::*;
        match self.id() {
            OdeForward | OdeInverse => self.times.iter().map(|t| self.reference(params, *t)).collect(),
            FokkerPlanckSteady => Ok(vec![self.reference(params, 0.0)?]),
            _ => {
                let solver = self.solver(params)?;
                let mut out = vec![self.initial_state(params)?];
                for _ in 1..self.times.len() {
                    let next = solver.apply(out.last().expect("nonempty"), self.settings.solver.steps)?;
                    out.push(next);
                }
                Ok(out)
            }
        }
    }

    /// Observation times (levels after t0) and data at the true parameters.
    pub fn observations(&self) -> Result<(Vec<f64>, Vec<StateVector>)> {
        let inv = self
            .settings
            .inverse
            .as_ref()
            .ok_or_else(|| ProblemError::Invalid(format!("{} is not an inverse problem", self.id())))?;
        let clean = self.reference_levels(&inv.truth)?;
        let data = add_observation_noise(&clean[1..], inv.noise, self.settings.seed.wrapping_add(1));
        Ok((self.times[1..].to_vec(), data))
    }

    /// Warnings for parameters outside the training ranges.
    pub fn range_warnings(&self, params: &[f64]) -> Vec<String> {
        self.id()
            .param_names()
            .iter()
            .zip(params)
            .zip(&self.param_ranges)
            .filter(|((_, v), (lo, hi))| !(*lo..=*hi).contains(*v))
            .map(|((name, v), (lo, hi))| format!("{name} = {v} lies outside the trained range [{lo}, {hi}]"))
            .collect()
    }

    fn beta_specs(&self) -> Vec<BetaSpec> {
        let inv = self.settings.inverse.as_ref().expect("inverse problem");
        self.id()
            .beta_indices()
            .iter()
            .zip(&inv.initial)
            .map(|(&index, &initial)| BetaSpec {
                index,
                initial,
                lower: self.param_ranges[index].0,
                upper: self.param_ranges[index].1,
            })
            .collect()
    }
}

fn family_for(id: ExperimentId, grid: &Grid, dt: f64) -> Result<SolverFamily> {
    use ExperimentId::*;
    let grid = *grid;
    let n = grid.point_count();
    Ok(match id {
        BurgersForward => {
            let Grid::Line(g) = grid else { unreachable!() };
            SolverFamily::new(move |p| Ok(Arc::new(FtcsBurgers::new(p[0], dt, g, 0.0, 0.0)?) as Arc<dyn Solver>))
        }
        FokkerPlanckSteady => {
            let Grid::Plane(g) = grid else { unreachable!() };
            SolverFamily::new(move |p| Ok(Arc::new(FokkerPlanckFvm::new(p[0], dt, g)?) as Arc<dyn Solver>))
        }
        AllenCahnForward | AllenCahnInverse => SolverFamily::new(move |p| {
            let cfg = SpectralPdeConfig {
                alpha: p[0],
                n_points: n,
                dt,
                allow_out_of_range: false,
            };
            Ok(Arc::new(allen_cahn_solver(&cfg)?) as Arc<dyn Solver>)
        }),
        KsForward | KsInverse => SolverFamily::new(move |p| {
            let cfg = SpectralPdeConfig {
                alpha: p[0],
                n_points: n,
                dt,
                allow_out_of_range: false,
            };
            Ok(Arc::new(ks_solver(&cfg)?) as Arc<dyn Solver>)
        }),
        OdeForward => SolverFamily::new(move |p| Ok(Arc::new(LinearOdeEuler::new(p[0], 0.0, dt)?) as Arc<dyn Solver>)),
        OdeInverse => SolverFamily::new(move |p| Ok(Arc::new(LinearOdeEuler::new(p[0], p[1], dt)?) as Arc<dyn Solver>)),
        LorenzForward => {
            let s: Arc<dyn Solver> = Arc::new(LorenzRk4::standard(dt)?);
            SolverFamily::constant(s)
        }
    })
}

pub struct RunOutcome {
    pub problem: Problem,
    pub record: RunRecord,
    pub surrogate: Surrogate,
    /// Recovered parameters of an inverse run.
    pub beta: Option<Vec<f64>>,
}

/// Train the configured experiment and evaluate its metrics.
///
/// An aborted run comes back as [`ProblemError::Aborted`] carrying the
/// partial record.
pub fn run(settings: ExperimentSettings, observer: &mut dyn FnMut(&EpochRecord)) -> Result<RunOutcome> {
    let problem = Problem::new(settings)?;
    let surrogate = problem.fresh_surrogate()?;
    let config = problem.training_config();
    let steps = problem.settings.solver.steps;
    let (mut record, surrogate, beta) = match problem.id().kind() {
        ProblemKind::Steady => {
            let mut task = SteadyTask {
                surrogate,
                family: problem.family.clone(),
                train_params: problem.train_params.clone(),
                steps,
                config,
            };
            let record = train_steady(&mut task, observer).map_err(Box::new)?;
            (record, task.surrogate, None)
        }
        ProblemKind::Transient => {
            let mut task = transient_task(&problem, surrogate, config);
            let record = train_transient(&mut task, observer).map_err(Box::new)?;
            (record, task.surrogate, None)
        }
        ProblemKind::Inverse => {
            let (observation_times, observations) = problem.observations()?;
            let inv = problem.settings.inverse.clone().expect("validated");
            let mut task = InverseTask {
                forward: transient_task(&problem, surrogate, config),
                observation_times,
                observations,
                known_params: inv.truth.clone(),
                beta: problem.beta_specs(),
                inverse_lr: inv.lr,
            };
            let out = train_inverse(&mut task, observer).map_err(Box::new)?;
            (out.record, task.forward.surrogate, Some(out.beta))
        }
    };
    let metrics = metrics::evaluate(&problem, &surrogate, beta.as_deref())?;
    record.final_metrics.extend(metrics);
    if let Some(l) = record.final_loss() {
        record.final_metrics.insert("final_loss".into(), l);
    }
    Ok(RunOutcome {
        problem,
        record,
        surrogate,
        beta,
    })
}

fn transient_task(problem: &Problem, surrogate: Surrogate, config: TrainingConfig) -> TransientTask {
    TransientTask {
        surrogate,
        family: problem.family.clone(),
        initial: problem.initial_condition(),
        times: problem.times.clone(),
        steps: problem.settings.solver.steps,
        train_params: problem.train_params.clone(),
        config,
        ic_weight: problem.settings.training.ic_weight,
    }
}
