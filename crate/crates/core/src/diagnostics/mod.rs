//! Fixed-point and rollout certificates for solver-consistent surrogates.
//!
//! All norms here are quadrature-weighted discrete L2 norms.

mod estimate;
mod fixed_point;
mod rollout;

use thiserror::Error;

use crate::numerics::NumericsError;
use crate::solvers::SolverError;
use crate::training::TrainingError;

pub use estimate::{
    estimate_contraction, estimate_lipschitz, estimate_lipschitz_pairs, perturbation_probes, ContractionEstimate,
    MapEstimate, ProbeConfig,
};
pub use fixed_point::{
    consistency_report, fixed_point_residual, long_run_reference, posteriori_bound_check, BoundStatus,
    ConsistencyReport, Reference, Residual,
};
pub use rollout::{rollout_bounds, rollout_deviation_check, rollout_report_from_levels, RolloutReport};

/// Inflation applied to sampled contraction and Lipschitz constants.
pub const DEFAULT_SAFETY: f64 = 1.1;

/// Pairs closer than this are skipped by the estimators.
pub const COINCIDENT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Training(#[from] TrainingError),
    #[error("need at least 2 probe states, got {0}")]
    TooFewProbes(usize),
    #[error("all {0} probe pairs coincide")]
    CoincidentProbes(usize),
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, DiagnosticsError>;

fn check_safety(safety: f64) -> Result<()> {
    if !(safety.is_finite() && safety >= 1.0) {
        return Err(DiagnosticsError::InvalidInput(format!("safety factor {safety} must be ≥ 1")));
    }
    Ok(())
}

/// `measured ≤ bound·(1+1e-9)`.
pub fn within_bound(measured: f64, bound: f64) -> bool {
    measured <= bound * (1.0 + 1e-9)
}
