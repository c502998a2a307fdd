//! Dense tanh networks with hand-written reverse mode, Adam/AdamW and
//! learning-rate schedules.

mod checkpoint;
mod mlp;
mod optimizer;
mod schedule;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use mlp::{Activation, AffineMap, ForwardCache, Gradients, InitScheme, Mlp, NetworkConfig};
pub use optimizer::{Optimizer, OptimizerConfig, OptimizerKind};
pub use schedule::LrSchedule;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("invalid network config: {0}")]
    InvalidConfig(String),
    #[error("{what}: expected {expected}, got {actual}")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite gradient {value} at parameter {index}")]
    NonFiniteGradient { index: usize, value: f64 },
    #[error("non-finite parameter {value} at index {index} after update")]
    NonFiniteParameter { index: usize, value: f64 },
    #[error("schedule step {step} outside [0, {total}]")]
    StepOutOfRange { step: usize, total: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, NetworkError>;
