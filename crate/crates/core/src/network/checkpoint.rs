use serde::{Deserialize, Serialize};

use super::{Mlp, NetworkError, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Serialized network plus free-form metadata (problem name, learned
/// parameters, training summary).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub network: Mlp,
    #[serde(default)]
    pub metadata: serde_json::Value,
}

impl Checkpoint {
    pub fn new(network: Mlp, metadata: serde_json::Value) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            network,
            metadata,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| NetworkError::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Self = serde_json::from_str(text).map_err(|e| NetworkError::Checkpoint(e.to_string()))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(NetworkError::Checkpoint(format!(
                "unsupported version {} (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        ck.network.validate()?;
        Ok(ck)
    }
}
