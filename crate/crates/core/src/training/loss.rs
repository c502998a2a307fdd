use super::{Result, Surrogate, TrainingError};
use crate::numerics::StateVector;
use crate::solvers::{Solver, SolverError};

/// Loss of one parameter sample and its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleLoss {
    pub ic: f64,
    pub solver: f64,
    /// Gradient with respect to θ.
    pub grad: Vec<f64>,
    /// Gradient with respect to the physical-parameter inputs.
    pub input_grad: Vec<f64>,
}

impl SampleLoss {
    pub fn total(&self) -> f64 {
        self.ic + self.solver
    }
}

/// Mean of squared entries of `a - b`.
pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// `d mse / d a`.
fn mse_adjoint(a: &[f64], b: &[f64], weight: f64) -> Vec<f64> {
    let c = 2.0 * weight / a.len() as f64;
    a.iter().zip(b).map(|(x, y)| c * (x - y)).collect()
}

fn run_solver(solver: &dyn Solver, u: &StateVector, steps: usize, params: &[f64], level: usize) -> Result<StateVector> {
    let report = solver.advance(u, steps).map_err(|source| TrainingError::Solver {
        params: params.to_vec(),
        level,
        source,
    })?;
    match report.fault {
        Some(fault) => Err(TrainingError::SolverFault {
            params: params.to_vec(),
            level,
            fault,
        }),
        None => Ok(report.state),
    }
}

/// `mse(f(α), S[f(α)])` with the solver output frozen.
pub fn steady_state_loss(s: &Surrogate, params: &[f64], solver: &dyn Solver, steps: usize) -> Result<SampleLoss> {
    steady_state_batch_loss(s, &[(params, solver)], steps)
}

/// Batch mean of [`steady_state_loss`] from one stacked network pass.
pub fn steady_state_batch_loss(s: &Surrogate, samples: &[(&[f64], &dyn Solver)], steps: usize) -> Result<SampleLoss> {
    if samples.is_empty() {
        return Err(TrainingError::InvalidTask("empty batch".into()));
    }
    let sets: Vec<&[f64]> = samples.iter().map(|(p, _)| *p).collect();
    let fw = s.forward_many(&[0.0], &sets)?;
    let w = 1.0 / samples.len() as f64;
    let mut loss = 0.0;
    let mut adjoints = Vec::with_capacity(samples.len());
    for ((params, solver), u) in samples.iter().zip(&fw.states) {
        let target = run_solver(*solver, u, steps, params, 0)?;
        loss += w * mse(u.values(), target.values());
        adjoints.push(mse_adjoint(u.values(), target.values(), w));
    }
    let g = s.backward(&fw, &adjoints)?;
    Ok(SampleLoss {
        ic: 0.0,
        solver: loss,
        grad: g.params,
        input_grad: g.inputs,
    })
}

/// `mse(f(t_0), u_0) + Σ_n mse(f(t_{n+1}), S[f(t_n)])`, solver outputs frozen.
pub fn transient_loss(
    s: &Surrogate,
    params: &[f64],
    solver: &dyn Solver,
    times: &[f64],
    steps: usize,
    initial: &StateVector,
) -> Result<SampleLoss> {
    transient_batch_loss(s, &[(params, solver, initial)], times, steps, 1.0)
}

/// Batch mean of [`transient_loss`] from one stacked network pass, with the
/// initial-condition term weighted by `ic_weight` in the gradient. The
/// reported `ic` stays unweighted.
pub fn transient_batch_loss(
    s: &Surrogate,
    samples: &[(&[f64], &dyn Solver, &StateVector)],
    times: &[f64],
    steps: usize,
    ic_weight: f64,
) -> Result<SampleLoss> {
    if times.len() < 2 {
        return Err(TrainingError::InvalidTask("need at least two time levels".into()));
    }
    if samples.is_empty() {
        return Err(TrainingError::InvalidTask("empty batch".into()));
    }
    let sets: Vec<&[f64]> = samples.iter().map(|(p, _, _)| *p).collect();
    let fw = s.forward_many(times, &sets)?;
    let w = 1.0 / samples.len() as f64;
    let mut adjoints = Vec::with_capacity(fw.states.len());
    let mut ic = 0.0;
    let mut consistency = 0.0;
    for ((params, solver, initial), states) in samples.iter().zip(fw.states.chunks(times.len())) {
        if !states[0].same_layout(initial) {
            return Err(TrainingError::InvalidTask("initial condition not on the surrogate grid".into()));
        }
        ic += w * mse(states[0].values(), initial.values());
        adjoints.push(mse_adjoint(states[0].values(), initial.values(), w * ic_weight));
        for n in 0..states.len() - 1 {
            let target = run_solver(*solver, &states[n], steps, params, n)?;
            let next = states[n + 1].values();
            consistency += w * mse(next, target.values());
            adjoints.push(mse_adjoint(next, target.values(), w));
        }
    }
    let g = s.backward(&fw, &adjoints)?;
    Ok(SampleLoss {
        ic,
        solver: consistency,
        grad: g.params,
        input_grad: g.inputs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseLoss {
    pub value: f64,
    /// Gradient with respect to every physical-parameter input.
    pub input_grad: Vec<f64>,
}

/// `(1/K) Σ_k mse(f(t_k, params), observed_k)`.
pub fn inverse_loss(s: &Surrogate, params: &[f64], times: &[f64], observed: &[StateVector]) -> Result<InverseLoss> {
    if times.len() != observed.len() || times.is_empty() {
        return Err(TrainingError::InvalidTask(format!(
            "{} observation times for {} observed states",
            times.len(),
            observed.len()
        )));
    }
    let fw = s.forward(times, params)?;
    let w = 1.0 / times.len() as f64;
    let mut value = 0.0;
    let mut adjoints = Vec::with_capacity(times.len());
    for (u, ob) in fw.states.iter().zip(observed) {
        if !u.same_layout(ob) {
            return Err(TrainingError::InvalidTask("observation not on the surrogate grid".into()));
        }
        value += w * mse(u.values(), ob.values());
        adjoints.push(mse_adjoint(u.values(), ob.values(), w));
    }
    let g = s.backward(&fw, &adjoints)?;
    Ok(InverseLoss {
        value,
        input_grad: g.inputs,
    })
}

impl From<SolverError> for TrainingError {
    fn from(source: SolverError) -> Self {
        TrainingError::Solver {
            params: Vec::new(),
            level: 0,
            source,
        }
    }
}
