//! Solver-consistency training: steady, transient and inverse loops.
//!
//! Solver outputs are frozen targets. Gradients reach θ only through the
//! network evaluations they are compared against.

mod batch;
mod family;
mod loops;
mod loss;
mod noise;
mod record;
mod surrogate;

pub use batch::{build_time_level_batch, build_time_pair_batch, split_pair_batch, BatchSampler};
pub use family::SolverFamily;
pub use loops::{
    train_inverse, train_steady, train_transient, BetaSpec, InitialCondition, InverseOutcome, InverseTask,
    SteadyTask, TrainAbort, TrainingConfig, TransientTask, UpdateGranularity,
};
pub use loss::{
    inverse_loss, mse, steady_state_batch_loss, steady_state_loss, transient_batch_loss, transient_loss, InverseLoss, SampleLoss,
};
pub use noise::{add_observation_noise, rms};
pub use record::{EpochRecord, RunRecord};
pub use surrogate::{OutputConstraint, Surrogate, SurrogateForward, SurrogateGradients, SurrogateLayout};

use thiserror::Error;

use crate::network::NetworkError;
use crate::numerics::NumericsError;
use crate::solvers::{Fault, SolverError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainingError {
    #[error("solver failed for params {params:?} at time level {level}: {source}")]
    Solver {
        params: Vec<f64>,
        level: usize,
        #[source]
        source: SolverError,
    },
    #[error("solver fault for params {params:?} at time level {level}: non-finite {} at step {} (index {})", .fault.value, .fault.step, .fault.index)]
    SolverFault { params: Vec<f64>, level: usize, fault: Fault },
    #[error("non-finite loss {value} at epoch {epoch}")]
    NonFiniteLoss { epoch: usize, value: f64 },
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, TrainingError>;
