use serde::{Deserialize, Serialize};

use super::{NetworkError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Weight decay, if any, is added to the gradient.
    Adam,
    /// Weight decay is applied to the parameters directly.
    AdamW,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl OptimizerConfig {
    pub fn adam() -> Self {
        Self {
            kind: OptimizerKind::Adam,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }

    pub fn adamw() -> Self {
        Self {
            kind: OptimizerKind::AdamW,
            weight_decay: 1e-2,
            ..Self::adam()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    config: OptimizerConfig,
    first: Vec<f64>,
    second: Vec<f64>,
    steps: u64,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, parameter_count: usize) -> Self {
        Self {
            config,
            first: vec![0.0; parameter_count],
            second: vec![0.0; parameter_count],
            steps: 0,
        }
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One bias-corrected update with learning rate `lr`.
    ///
    /// Nothing is modified when the gradient is rejected.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        let n = self.first.len();
        for (what, len) in [("parameters", params.len()), ("gradient", grads.len())] {
            if len != n {
                return Err(NetworkError::Shape { what, expected: n, actual: len });
            }
        }
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(NetworkError::NonFiniteGradient { index, value: grads[index] });
        }
        let c = self.config;
        self.steps += 1;
        let t = self.steps as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        for i in 0..n {
            let mut g = grads[i];
            match c.kind {
                OptimizerKind::Adam => g += c.weight_decay * params[i],
                OptimizerKind::AdamW => params[i] *= 1.0 - lr * c.weight_decay,
            }
            self.first[i] = c.beta1 * self.first[i] + (1.0 - c.beta1) * g;
            self.second[i] = c.beta2 * self.second[i] + (1.0 - c.beta2) * g * g;
            let m_hat = self.first[i] / bc1;
            let v_hat = self.second[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + c.eps);
        }
        if let Some(index) = params.iter().position(|p| !p.is_finite()) {
            return Err(NetworkError::NonFiniteParameter { index, value: params[index] });
        }
        Ok(())
    }
}
