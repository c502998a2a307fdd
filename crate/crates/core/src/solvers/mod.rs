//! Black-box evolution operators.
//!
//! A [`Solver`] is the map `u ↦ S[u, B[u], α, N_s]` with boundary handling and
//! physical parameters fixed at construction. `advance` never mutates its
//! input and is deterministic: identical inputs give bit-identical outputs,
//! and `advance(advance(u, n1), n2)` equals `advance(u, n1 + n2)`.

mod banded;
mod burgers;
mod etdrk4;
mod fokker_planck;
mod linear_ode;
mod lorenz;
mod params;

pub use banded::{BandedLu, BandedMatrix};
pub use burgers::{cfl_check, ftcs_burgers_advance_batch, CflReport, FtcsBurgers};
pub use etdrk4::{
    allen_cahn_initial_state, allen_cahn_solver, ks_initial_state, ks_solver, CubicReaction,
    Etdrk4, QuadraticAdvection, SpectralNonlinearity, SpectralPdeConfig, ZeroNonlinearity,
    ALLEN_CAHN_ALPHA_RANGE, KS_ALPHA_RANGE,
};
pub use fokker_planck::{bernoulli, boltzmann_equilibrium, potential, FokkerPlanckFvm};
pub use linear_ode::{forward_euler_advance, linear_ode_analytic, LinearOdeEuler};
pub use lorenz::{lorenz_advance, LorenzRk4};
pub use params::{BoundarySpec, PhysicalParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{first_non_finite, NumericsError, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("CFL condition violated: advective {} diffusive {}", .0.advective, .0.diffusive)]
    Cfl(CflReport),
    #[error("linear solve did not converge, relative residual {residual:e}")]
    LinearSolve { residual: f64 },
    #[error("solver produced a non-finite value {} at step {} (index {})", .0.value, .0.step, .0.index)]
    Fault(Fault),
    #[error("state incompatible with solver: {0}")]
    InvalidState(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// First non-finite entry met while stepping. `step == 0` flags the input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub step: usize,
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StabilityFlags {
    pub cfl: Option<CflReport>,
    /// Largest relative residual of the implicit solves.
    pub linear_residual: Option<f64>,
    /// Number of negative input entries (densities only).
    pub negative_inputs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub state: StateVector,
    pub steps_taken: usize,
    pub stability: StabilityFlags,
    pub fault: Option<Fault>,
}

impl StepReport {
    pub fn into_state(self) -> Result<StateVector, SolverError> {
        match self.fault {
            Some(f) => Err(SolverError::Fault(f)),
            None => Ok(self.state),
        }
    }
}

pub trait Solver: Send + Sync {
    fn name(&self) -> &'static str;

    /// Internal step size Δt.
    fn time_step(&self) -> f64;

    fn advance(&self, state: &StateVector, steps: usize) -> Result<StepReport, SolverError>;

    /// Remove from a perturbation the components the solver conserves
    /// exactly. Contraction estimates are taken on the remaining subspace.
    fn project_perturbation(&self, _direction: &mut [f64]) {}

    /// `advance` followed by fault conversion.
    fn apply(&self, state: &StateVector, steps: usize) -> Result<StateVector, SolverError> {
        self.advance(state, steps)?.into_state()
    }
}

/// Iterate `step` from `state`, checking finiteness after every step.
pub(crate) fn run_steps(
    state: &StateVector,
    steps: usize,
    stability: StabilityFlags,
    mut step: impl FnMut(&[f64], &mut [f64]) -> Result<(), SolverError>,
) -> Result<StepReport, SolverError> {
    if let Some((index, value)) = first_non_finite(state.values()) {
        return Ok(StepReport {
            state: state.clone(),
            steps_taken: 0,
            stability,
            fault: Some(Fault {
                step: 0,
                index,
                value,
            }),
        });
    }
    let mut current = state.values().to_vec();
    let mut next = vec![0.0; current.len()];
    for n in 1..=steps {
        step(&current, &mut next)?;
        std::mem::swap(&mut current, &mut next);
        if let Some((index, value)) = first_non_finite(&current) {
            return Ok(StepReport {
                state: state.with_values(current)?,
                steps_taken: n,
                stability,
                fault: Some(Fault {
                    step: n,
                    index,
                    value,
                }),
            });
        }
    }
    Ok(StepReport {
        state: state.with_values(current)?,
        steps_taken: steps,
        stability,
        fault: None,
    })
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<(), SolverError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(SolverError::InvalidParams(format!("{name} must be positive, got {value}")))
    }
}

pub(crate) fn require_finite(name: &str, value: f64) -> Result<(), SolverError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(SolverError::InvalidParams(format!("{name} must be finite, got {value}")))
    }
}

#[cfg(test)]
pub(crate) struct IdentitySolver;

#[cfg(test)]
impl Solver for IdentitySolver {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn time_step(&self) -> f64 {
        1.0
    }

    fn advance(&self, state: &StateVector, steps: usize) -> Result<StepReport, SolverError> {
        run_steps(state, steps, StabilityFlags::default(), |cur, next| {
            next.copy_from_slice(cur);
            Ok(())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_steps_flags_non_finite_input() {
        let s = StateVector::new(crate::numerics::Grid::Point, 2, vec![1.0, f64::INFINITY]).unwrap();
        let r = IdentitySolver.advance(&s, 3).unwrap();
        assert_eq!(r.steps_taken, 0);
        assert_eq!(r.fault.map(|f| (f.step, f.index)), Some((0, 1)));
        assert!(matches!(IdentitySolver.apply(&s, 1), Err(SolverError::Fault(_))));
    }

    #[test]
    fn zero_steps_return_the_input() {
        let s = StateVector::scalar(3.5);
        let r = IdentitySolver.advance(&s, 0).unwrap();
        assert_eq!((r.state, r.steps_taken, r.fault), (s, 0, None));
    }
}
