//! Forward Euler for `dy/dt = -α y + k` and its closed-form solution.

use super::{require_finite, require_positive, run_steps, Solver, SolverError, StabilityFlags, StepReport};
use crate::numerics::{Grid, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearOdeEuler {
    alpha: f64,
    k: f64,
    dt: f64,
}

impl LinearOdeEuler {
    pub fn new(alpha: f64, k: f64, dt: f64) -> Result<Self, SolverError> {
        require_finite("alpha", alpha)?;
        require_finite("k", k)?;
        require_positive("dt", dt)?;
        Ok(Self { alpha, k, dt })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Per-step amplification `1 - αΔt`.
    pub fn amplification(&self) -> f64 {
        1.0 - self.alpha * self.dt
    }
}

impl Solver for LinearOdeEuler {
    fn name(&self) -> &'static str {
        "forward-euler"
    }

    fn time_step(&self) -> f64 {
        self.dt
    }

    /// Every entry of a point state is an independent trajectory.
    fn advance(&self, state: &StateVector, steps: usize) -> Result<StepReport, SolverError> {
        if *state.grid() != Grid::Point {
            return Err(SolverError::InvalidState("forward Euler expects a point state".into()));
        }
        let a = self.amplification();
        let src = self.k * self.dt;
        run_steps(state, steps, StabilityFlags::default(), |cur, next| {
            for (n, c) in next.iter_mut().zip(cur) {
                *n = c * a + src;
            }
            Ok(())
        })
    }
}

/// Apply `y ← y(1 − αΔt) + kΔt` `steps` times.
pub fn forward_euler_advance(
    y: &StateVector,
    alpha: f64,
    k: f64,
    dt: f64,
    steps: usize,
) -> Result<StepReport, SolverError> {
    LinearOdeEuler::new(alpha, k, dt)?.advance(y, steps)
}

/// `y(t) = k/α + (y0 − k/α) e^{−αt}`.
pub fn linear_ode_analytic(t: f64, alpha: f64, k: f64, y0: f64) -> Result<f64, SolverError> {
    if alpha == 0.0 {
        return Err(SolverError::InvalidParams("alpha = 0 makes k/alpha singular".into()));
    }
    let eq = k / alpha;
    Ok(eq + (y0 - eq) * (-alpha * t).exp())
}
