use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SolverError;

/// Named scalar physical parameters, e.g. `nu`, `alpha`, `k`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams(BTreeMap<String, f64>);

impl PhysicalParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) -> Result<(), SolverError> {
        super::require_finite(name, value)?;
        self.0.insert(name.to_string(), value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<f64, SolverError> {
        let v = self
            .0
            .get(name)
            .copied()
            .ok_or_else(|| SolverError::InvalidParams(format!("missing parameter `{name}`")))?;
        super::require_finite(name, v)?;
        Ok(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySpec {
    Dirichlet { left: f64, right: f64 },
    Periodic,
    NoFlux,
}
