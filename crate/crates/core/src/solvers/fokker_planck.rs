//! Finite-volume Fokker–Planck solver on the unit square with no-flux walls.
//!
//! Solves `u_t = ∇·(∇u + u∇V)` for `V = α sin(2πx) sin(2πy)`. Face fluxes use
//! the Scharfetter–Gummel form, which makes the cell-centered Boltzmann
//! profile `e^{-V}` an exact discrete steady state. Steps are implicit Euler.

use std::f64::consts::PI;

use super::banded::{BandedLu, BandedMatrix};
use super::{require_finite, require_positive, run_steps, Solver, SolverError, StabilityFlags, StepReport};
use crate::numerics::{trapezoid_integral_2d, Grid, Grid2D, StateVector};

/// Relative residual above which an implicit solve counts as failed.
const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Bernoulli function `z / (e^z - 1)`.
pub fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z / 2.0 + z * z / 12.0
    } else {
        z / z.exp_m1()
    }
}

/// Potential at the cell centers, in storage order.
pub fn potential(alpha: f64, grid: &Grid2D) -> Vec<f64> {
    grid.cell_centers()
        .into_iter()
        .map(|(x, y)| alpha * (2.0 * PI * x).sin() * (2.0 * PI * y).sin())
        .collect()
}

/// Unit-mass density proportional to `e^{-V}` at the cell centers.
pub fn boltzmann_equilibrium(alpha: f64, grid: &Grid2D) -> Result<StateVector, SolverError> {
    require_finite("alpha", alpha)?;
    let weights: Vec<f64> = potential(alpha, grid).iter().map(|v| (-v).exp()).collect();
    let z = trapezoid_integral_2d(&weights, grid)?;
    let values = weights.into_iter().map(|w| w / z).collect();
    Ok(StateVector::new(Grid::Plane(*grid), 1, values)?)
}

#[derive(Debug, Clone)]
pub struct FokkerPlanckFvm {
    alpha: f64,
    dt: f64,
    grid: Grid2D,
    system: BandedMatrix,
    lu: BandedLu,
    clip_nonneg: bool,
}

impl FokkerPlanckFvm {
    pub fn new(alpha: f64, dt: f64, grid: Grid2D) -> Result<Self, SolverError> {
        require_finite("alpha", alpha)?;
        require_positive("dt", dt)?;
        let mut system = Self::flux_operator(alpha, &grid);
        system.scale(-dt);
        for p in 0..grid.len() {
            system.add(p, p, 1.0);
        }
        let lu = BandedLu::factor(system.clone())?;
        Ok(Self {
            alpha,
            dt,
            grid,
            system,
            lu,
            clip_nonneg: false,
        })
    }

    /// Clip negative input entries to zero before stepping.
    pub fn clip_nonneg(mut self, clip: bool) -> Self {
        self.clip_nonneg = clip;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// The semi-discrete operator `A` with `du/dt = A u`.
    pub fn flux_operator(alpha: f64, grid: &Grid2D) -> BandedMatrix {
        let (nx, ny) = (grid.n_x(), grid.n_y());
        let v = potential(alpha, grid);
        let mut a = BandedMatrix::zeros(grid.len(), nx, nx);
        let mut couple = |p: usize, q: usize, h: f64| {
            let delta = v[q] - v[p];
            let fwd = bernoulli(delta) / (h * h);
            let back = bernoulli(-delta) / (h * h);
            a.add(p, p, -fwd);
            a.add(p, q, back);
            a.add(q, p, fwd);
            a.add(q, q, -back);
        };
        for j in 0..ny {
            for i in 0..nx {
                let p = grid.index(i, j);
                if i + 1 < nx {
                    couple(p, grid.index(i + 1, j), grid.dx());
                }
                if j + 1 < ny {
                    couple(p, grid.index(i, j + 1), grid.dy());
                }
            }
        }
        a
    }
}

impl Solver for FokkerPlanckFvm {
    fn name(&self) -> &'static str {
        "fvm-fokker-planck"
    }

    fn time_step(&self) -> f64 {
        self.dt
    }

    fn advance(&self, state: &StateVector, steps: usize) -> Result<StepReport, SolverError> {
        if *state.grid() != Grid::Plane(self.grid) || state.field_count() != 1 {
            return Err(SolverError::InvalidState("state is not on the solver grid".into()));
        }
        let negative_inputs = state.values().iter().filter(|v| **v < 0.0).count();
        let input = if self.clip_nonneg && negative_inputs > 0 {
            state.with_values(state.values().iter().map(|v| v.max(0.0)).collect())?
        } else {
            state.clone()
        };
        let mut worst = 0.0f64;
        let mut check = vec![0.0; self.grid.len()];
        let mut report = run_steps(&input, steps, StabilityFlags::default(), |u, next| {
            next.copy_from_slice(u);
            self.lu.solve_in_place(next);
            self.system.mul_vec(next, &mut check);
            let scale = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            let res = check.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let rel = if scale > 0.0 { res / scale } else { res };
            if rel > RESIDUAL_TOLERANCE || rel.is_nan() {
                return Err(SolverError::LinearSolve { residual: rel });
            }
            worst = worst.max(rel);
            Ok(())
        })?;
        report.stability.linear_residual = Some(worst);
        report.stability.negative_inputs = negative_inputs;
        Ok(report)
    }

    /// Mass is conserved exactly, so perturbations lose their mean.
    fn project_perturbation(&self, direction: &mut [f64]) {
        let mean = direction.iter().sum::<f64>() / direction.len() as f64;
        direction.iter_mut().for_each(|d| *d -= mean);
    }
}
