//! Fixed-step classical RK4 for the Lorenz system.

use super::{require_finite, require_positive, run_steps, Solver, SolverError, StabilityFlags, StepReport};
use crate::numerics::{Grid, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzRk4 {
    sigma: f64,
    rho: f64,
    beta: f64,
    dt: f64,
}

impl LorenzRk4 {
    pub fn new(sigma: f64, rho: f64, beta: f64, dt: f64) -> Result<Self, SolverError> {
        require_finite("sigma", sigma)?;
        require_finite("rho", rho)?;
        require_finite("beta", beta)?;
        require_positive("dt", dt)?;
        Ok(Self { sigma, rho, beta, dt })
    }

    /// σ = 10, ρ = 28, β = 8/3.
    pub fn standard(dt: f64) -> Result<Self, SolverError> {
        Self::new(10.0, 28.0, 8.0 / 3.0, dt)
    }

    pub fn vector_field(&self, s: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = s;
        [self.sigma * (y - x), x * (self.rho - z) - y, x * y - self.beta * z]
    }

    fn rk4(&self, s: [f64; 3]) -> [f64; 3] {
        let h = self.dt;
        let shift = |s: [f64; 3], k: [f64; 3], c: f64| [s[0] + c * k[0], s[1] + c * k[1], s[2] + c * k[2]];
        let k1 = self.vector_field(s);
        let k2 = self.vector_field(shift(s, k1, h / 2.0));
        let k3 = self.vector_field(shift(s, k2, h / 2.0));
        let k4 = self.vector_field(shift(s, k3, h));
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }
}

impl Solver for LorenzRk4 {
    fn name(&self) -> &'static str {
        "lorenz-rk4"
    }

    fn time_step(&self) -> f64 {
        self.dt
    }

    fn advance(&self, state: &StateVector, steps: usize) -> Result<StepReport, SolverError> {
        if *state.grid() != Grid::Point || state.len() != 3 {
            return Err(SolverError::InvalidState("Lorenz expects a 3-component point state".into()));
        }
        run_steps(state, steps, StabilityFlags::default(), |cur, next| {
            next.copy_from_slice(&self.rk4([cur[0], cur[1], cur[2]]));
            Ok(())
        })
    }
}

pub fn lorenz_advance(
    state: [f64; 3],
    sigma: f64,
    rho: f64,
    beta: f64,
    dt: f64,
    steps: usize,
) -> Result<StepReport, SolverError> {
    let s = StateVector::new(Grid::Point, 3, state.to_vec())?;
    LorenzRk4::new(sigma, rho, beta, dt)?.advance(&s, steps)
}
