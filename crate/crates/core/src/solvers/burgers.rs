//! Explicit FTCS scheme for viscous Burgers with Dirichlet ends.

use serde::{Deserialize, Serialize};

use super::{require_finite, require_positive, run_steps, Solver, SolverError, StabilityFlags, StepReport};
use crate::numerics::{Grid, Grid1D, StateVector};

/// Stability ratios of one FTCS configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CflReport {
    /// `u_max Δt / Δx`, must stay below 1.
    pub advective: f64,
    /// `ν Δt / Δx²`, must stay below 1/2.
    pub diffusive: f64,
    pub pass: bool,
}

pub fn cfl_check(u_max: f64, nu: f64, dt: f64, dx: f64) -> CflReport {
    let advective = u_max.abs() * dt / dx;
    let diffusive = nu * dt / (dx * dx);
    CflReport {
        advective,
        diffusive,
        pass: advective < 1.0 && diffusive < 0.5,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FtcsBurgers {
    nu: f64,
    dt: f64,
    grid: Grid1D,
    left: f64,
    right: f64,
    allow_unstable: bool,
}

impl FtcsBurgers {
    pub fn new(nu: f64, dt: f64, grid: Grid1D, left: f64, right: f64) -> Result<Self, SolverError> {
        require_finite("nu", nu)?;
        if nu < 0.0 {
            return Err(SolverError::InvalidParams(format!("nu must be nonnegative, got {nu}")));
        }
        require_positive("dt", dt)?;
        require_finite("left boundary", left)?;
        require_finite("right boundary", right)?;
        if grid.is_periodic() {
            return Err(SolverError::InvalidState("FTCS Burgers needs a Dirichlet grid".into()));
        }
        if grid.len() < 3 {
            return Err(SolverError::InvalidState("FTCS Burgers needs an interior point".into()));
        }
        Ok(Self {
            nu,
            dt,
            grid,
            left,
            right,
            allow_unstable: false,
        })
    }

    /// Advance even when the CFL check fails. The report is still attached.
    pub fn allow_unstable(mut self, allow: bool) -> Self {
        self.allow_unstable = allow;
        self
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self, SolverError> {
        Ok(Self::new(nu, self.dt, self.grid, self.left, self.right)?.allow_unstable(self.allow_unstable))
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn boundary_values(&self) -> (f64, f64) {
        (self.left, self.right)
    }
}

impl Solver for FtcsBurgers {
    fn name(&self) -> &'static str {
        "ftcs-burgers"
    }

    fn time_step(&self) -> f64 {
        self.dt
    }

    fn advance(&self, state: &StateVector, steps: usize) -> Result<StepReport, SolverError> {
        if *state.grid() != Grid::Line(self.grid) || state.field_count() != 1 {
            return Err(SolverError::InvalidState("state is not on the solver grid".into()));
        }
        let dx = self.grid.spacing();
        let u_max = state
            .values()
            .iter()
            .fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { m });
        let cfl = cfl_check(u_max, self.nu, self.dt, dx);
        if !cfl.pass && !self.allow_unstable {
            return Err(SolverError::Cfl(cfl));
        }
        let stability = StabilityFlags {
            cfl: Some(cfl),
            ..Default::default()
        };
        let adv = self.dt / (2.0 * dx);
        let diff = self.nu * self.dt / (dx * dx);
        let n = self.grid.len();
        run_steps(state, steps, stability, |u, next| {
            next[0] = self.left;
            next[n - 1] = self.right;
            for i in 1..n - 1 {
                let (l, c, r) = (u[i - 1], u[i], u[i + 1]);
                next[i] = c - adv * c * (r - l) + diff * (r - 2.0 * c + l);
            }
            Ok(())
        })
    }
}

/// One trajectory per `(state, ν)` pair, sharing grid, step and boundaries.
pub fn ftcs_burgers_advance_batch(
    base: &FtcsBurgers,
    states: &[StateVector],
    nus: &[f64],
    steps: usize,
) -> Result<Vec<StepReport>, SolverError> {
    if states.len() != nus.len() {
        return Err(SolverError::InvalidParams(format!(
            "{} states but {} viscosities",
            states.len(),
            nus.len()
        )));
    }
    states
        .iter()
        .zip(nus)
        .map(|(u, &nu)| base.with_nu(nu)?.advance(u, steps))
        .collect()
}
