//! Preset experiments: solver families, surrogates, training sets, reference
//! solutions and evaluation metrics for every supported problem.

mod diagnose;
mod export;
mod metrics;
mod presets;
mod setup;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::network::{NetworkError, OptimizerKind};
use crate::numerics::NumericsError;
use crate::solvers::SolverError;
use crate::training::{TrainAbort, TrainingError, UpdateGranularity};

pub use diagnose::{diagnose, Diagnosis, LabeledConsistency, LabeledRollout};
pub use export::{export_fields, FieldTable};
pub use metrics::evaluate;
pub use setup::{run, Problem, RunOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    BurgersForward,
    FokkerPlanckSteady,
    AllenCahnForward,
    AllenCahnInverse,
    KsForward,
    KsInverse,
    OdeForward,
    OdeInverse,
    LorenzForward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Steady,
    Transient,
    Inverse,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        ExperimentId::BurgersForward,
        ExperimentId::FokkerPlanckSteady,
        ExperimentId::AllenCahnForward,
        ExperimentId::AllenCahnInverse,
        ExperimentId::KsForward,
        ExperimentId::KsInverse,
        ExperimentId::OdeForward,
        ExperimentId::OdeInverse,
        ExperimentId::LorenzForward,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::BurgersForward => "burgers-forward",
            ExperimentId::FokkerPlanckSteady => "fokker-planck-steady",
            ExperimentId::AllenCahnForward => "allen-cahn-forward",
            ExperimentId::AllenCahnInverse => "allen-cahn-inverse",
            ExperimentId::KsForward => "ks-forward",
            ExperimentId::KsInverse => "ks-inverse",
            ExperimentId::OdeForward => "ode-forward",
            ExperimentId::OdeInverse => "ode-inverse",
            ExperimentId::LorenzForward => "lorenz-forward",
        }
    }

    pub fn kind(self) -> ProblemKind {
        match self {
            ExperimentId::FokkerPlanckSteady => ProblemKind::Steady,
            ExperimentId::AllenCahnInverse | ExperimentId::KsInverse | ExperimentId::OdeInverse => ProblemKind::Inverse,
            _ => ProblemKind::Transient,
        }
    }

    /// Names of the physical-parameter inputs, in input-column order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ExperimentId::BurgersForward => &["nu"],
            ExperimentId::FokkerPlanckSteady
            | ExperimentId::AllenCahnForward
            | ExperimentId::AllenCahnInverse
            | ExperimentId::KsForward
            | ExperimentId::KsInverse => &["alpha"],
            ExperimentId::OdeForward => &["alpha", "y0"],
            ExperimentId::OdeInverse => &["alpha", "k", "y0"],
            ExperimentId::LorenzForward => &[],
        }
    }

    /// Parameter entries recovered by the inverse loop.
    pub fn beta_indices(self) -> &'static [usize] {
        match self {
            ExperimentId::AllenCahnInverse | ExperimentId::KsInverse => &[0],
            ExperimentId::OdeInverse => &[0, 1],
            _ => &[],
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = ProblemError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| ProblemError::Invalid(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    /// Internal solver step.
    pub dt: f64,
    /// Solver steps per network time level (or per steady loss evaluation).
    pub steps: usize,
    /// Spatial spacing; absent for ODE systems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSettings {
    pub hidden_layers: usize,
    pub hidden_width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub granularity: UpdateGranularity,
    pub lr: f64,
    pub schedule: ScheduleKind,
    /// Floor of the cosine schedule.
    pub min_lr: f64,
    pub optimizer: OptimizerKind,
    pub weight_decay: f64,
    /// Weight of the initial-condition term of transient losses.
    #[serde(default = "unit_weight")]
    pub ic_weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSettings {
    /// Full parameter vector of the observed system.
    pub truth: Vec<f64>,
    /// Starting guesses for the recovered entries.
    pub initial: Vec<f64>,
    /// Observation noise as a fraction of the signal RMS.
    pub noise: f64,
    pub lr: f64,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSettings {
    pub experiment: ExperimentId,
    pub seed: u64,
    /// Long-running preset, excluded from the default sweep.
    pub extended: bool,
    pub solver: SolverSettings,
    pub network: NetworkSettings,
    pub training: TrainingSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<InverseSettings>,
}

impl ExperimentSettings {
    pub fn preset(id: ExperimentId) -> Self {
        presets::preset(id)
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Training(#[from] TrainingError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Aborted(#[from] Box<TrainAbort>),
}

pub type Result<T> = std::result::Result<T, ProblemError>;
