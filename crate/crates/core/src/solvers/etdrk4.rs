//! ETDRK4 for periodic 1D problems `u_t = L u + N(u)` with `L` diagonal in
//! Fourier space, plus the Allen–Cahn and Kuramoto–Sivashinsky presets.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::{require_positive, run_steps, Solver, SolverError, StabilityFlags, StepReport};
use crate::numerics::{Grid, Grid1D, Spectral1D, StateVector};

pub const ALLEN_CAHN_ALPHA_RANGE: (f64, f64) = (1e-4, 1e-3);
pub const KS_ALPHA_RANGE: (f64, f64) = (1.0, 1.5);

const CONTOUR_POINTS: usize = 32;

/// Nonlinear term evaluated in physical space, returned as Fourier coefficients.
pub trait SpectralNonlinearity: Send + Sync {
    fn evaluate(&self, u: &[f64], spectral: &Spectral1D) -> Vec<Complex64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNonlinearity;

impl SpectralNonlinearity for ZeroNonlinearity {
    fn evaluate(&self, u: &[f64], _: &Spectral1D) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); u.len()]
    }
}

/// `c (u - u³)`.
#[derive(Debug, Clone, Copy)]
pub struct CubicReaction {
    pub coefficient: f64,
}

impl SpectralNonlinearity for CubicReaction {
    fn evaluate(&self, u: &[f64], spectral: &Spectral1D) -> Vec<Complex64> {
        let c = self.coefficient;
        let r: Vec<f64> = u.iter().map(|v| c * (v - v * v * v)).collect();
        spectral.forward(&r)
    }
}

/// `-u u_x`, evaluated as `-(u²)_x / 2`.
#[derive(Debug, Clone)]
pub struct QuadraticAdvection {
    symbol: Vec<Complex64>,
}

impl QuadraticAdvection {
    pub fn new(spectral: &Spectral1D) -> Self {
        let symbol = spectral.derivative_symbol(1).into_iter().map(|s| -0.5 * s).collect();
        Self { symbol }
    }
}

impl SpectralNonlinearity for QuadraticAdvection {
    fn evaluate(&self, u: &[f64], spectral: &Spectral1D) -> Vec<Complex64> {
        let sq: Vec<f64> = u.iter().map(|v| v * v).collect();
        let mut c = spectral.forward(&sq);
        c.iter_mut().zip(&self.symbol).for_each(|(c, s)| *c *= s);
        c
    }
}

#[derive(Debug, Clone)]
pub struct Etdrk4<N> {
    spectral: Spectral1D,
    grid: Grid1D,
    dt: f64,
    eigenvalues: Vec<f64>,
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    nonlinear: N,
}

impl<N: SpectralNonlinearity> Etdrk4<N> {
    /// `eigenvalues[j]` is the linear symbol at the `j`-th FFT wavenumber.
    pub fn new(grid: Grid1D, dt: f64, eigenvalues: Vec<f64>, nonlinear: N) -> Result<Self, SolverError> {
        require_positive("dt", dt)?;
        let spectral = Spectral1D::new(&grid)?;
        if eigenvalues.len() != grid.len() {
            return Err(SolverError::InvalidParams(format!(
                "{} eigenvalues for {} modes",
                eigenvalues.len(),
                grid.len()
            )));
        }
        if let Some(bad) = eigenvalues.iter().find(|l| !l.is_finite()) {
            return Err(SolverError::InvalidParams(format!("non-finite eigenvalue {bad}")));
        }
        let n = grid.len();
        let (mut e, mut e2, mut q, mut f1, mut f2, mut f3) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for (j, &lambda) in eigenvalues.iter().enumerate() {
            let l = dt * lambda;
            e[j] = l.exp();
            e2[j] = (l / 2.0).exp();
            let (mut sq, mut s1, mut s2, mut s3) = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
            for m in 0..CONTOUR_POINTS {
                let theta = 2.0 * PI * (m as f64 + 0.5) / CONTOUR_POINTS as f64;
                let z = l + Complex64::from_polar(1.0, theta);
                let ez = z.exp();
                let z3 = z * z * z;
                sq += ((z / 2.0).exp() - 1.0) / z;
                s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                s2 += (2.0 + z + ez * (z - 2.0)) / z3;
                s3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            let scale = dt / CONTOUR_POINTS as f64;
            q[j] = (sq * scale).re;
            f1[j] = (s1 * scale).re;
            f2[j] = (s2 * scale).re;
            f3[j] = (s3 * scale).re;
        }
        Ok(Self {
            spectral,
            grid,
            dt,
            eigenvalues,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            nonlinear,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn spectral(&self) -> &Spectral1D {
        &self.spectral
    }

    fn step(&self, u: &[f64], out: &mut [f64]) {
        let sp = &self.spectral;
        let v = sp.forward(u);
        let nv = self.nonlinear.evaluate(u, sp);
        let a: Vec<Complex64> = (0..v.len()).map(|j| self.e2[j] * v[j] + self.q[j] * nv[j]).collect();
        let na = self.nonlinear.evaluate(&sp.inverse(&a), sp);
        let b: Vec<Complex64> = (0..v.len()).map(|j| self.e2[j] * v[j] + self.q[j] * na[j]).collect();
        let nb = self.nonlinear.evaluate(&sp.inverse(&b), sp);
        let c: Vec<Complex64> = (0..v.len())
            .map(|j| self.e2[j] * a[j] + self.q[j] * (2.0 * nb[j] - nv[j]))
            .collect();
        let nc = self.nonlinear.evaluate(&sp.inverse(&c), sp);
        let next: Vec<Complex64> = (0..v.len())
            .map(|j| {
                self.e[j] * v[j] + self.f1[j] * nv[j] + 2.0 * self.f2[j] * (na[j] + nb[j]) + self.f3[j] * nc[j]
            })
            .collect();
        out.copy_from_slice(&sp.inverse(&next));
    }
}

impl<N: SpectralNonlinearity> Solver for Etdrk4<N> {
    fn name(&self) -> &'static str {
        "etdrk4"
    }

    fn time_step(&self) -> f64 {
        self.dt
    }

    fn advance(&self, state: &StateVector, steps: usize) -> Result<StepReport, SolverError> {
        if *state.grid() != Grid::Line(self.grid) || state.field_count() != 1 {
            return Err(SolverError::InvalidState("state is not on the solver grid".into()));
        }
        run_steps(state, steps, StabilityFlags::default(), |u, next| {
            self.step(u, next);
            Ok(())
        })
    }
}

/// Grid, step and parameter of a spectral preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPdeConfig {
    pub alpha: f64,
    pub n_points: usize,
    pub dt: f64,
    /// Accept `alpha` outside the preset range.
    pub allow_out_of_range: bool,
}

impl SpectralPdeConfig {
    pub fn allen_cahn(alpha: f64) -> Self {
        Self {
            alpha,
            n_points: 101,
            dt: 0.01,
            allow_out_of_range: false,
        }
    }

    pub fn kuramoto_sivashinsky(alpha: f64) -> Self {
        Self {
            alpha,
            n_points: 100,
            dt: 0.02,
            allow_out_of_range: false,
        }
    }

    fn check_alpha(&self, range: (f64, f64), name: &str) -> Result<(), SolverError> {
        if !self.alpha.is_finite() {
            return Err(SolverError::InvalidParams(format!("{name} alpha must be finite")));
        }
        if !self.allow_out_of_range && !(range.0..=range.1).contains(&self.alpha) {
            return Err(SolverError::InvalidParams(format!(
                "{name} alpha {} outside [{}, {}]",
                self.alpha, range.0, range.1
            )));
        }
        Ok(())
    }
}

fn allen_cahn_grid(n: usize) -> Result<Grid1D, SolverError> {
    Ok(Grid1D::new(-1.0, 1.0, n, true)?)
}

fn ks_grid(n: usize) -> Result<Grid1D, SolverError> {
    Ok(Grid1D::new(0.0, 100.0, n, true)?)
}

/// `u_t = α u_xx + 5u − 5u³` on `[-1, 1)`.
pub fn allen_cahn_solver(config: &SpectralPdeConfig) -> Result<Etdrk4<CubicReaction>, SolverError> {
    config.check_alpha(ALLEN_CAHN_ALPHA_RANGE, "Allen-Cahn")?;
    let grid = allen_cahn_grid(config.n_points)?;
    let spectral = Spectral1D::new(&grid)?;
    let eig = spectral.wavenumbers().iter().map(|k| -config.alpha * k * k).collect();
    Etdrk4::new(grid, config.dt, eig, CubicReaction { coefficient: 5.0 })
}

pub fn allen_cahn_initial_state(grid: &Grid1D) -> StateVector {
    let values = grid.points().iter().map(|x| x * x * (PI * x).cos()).collect();
    StateVector::new(Grid::Line(*grid), 1, values).expect("length matches grid")
}

/// `u_t = −α u_xx − u_xxxx − u u_x` on `[0, 100)`.
pub fn ks_solver(config: &SpectralPdeConfig) -> Result<Etdrk4<QuadraticAdvection>, SolverError> {
    config.check_alpha(KS_ALPHA_RANGE, "Kuramoto-Sivashinsky")?;
    let grid = ks_grid(config.n_points)?;
    let spectral = Spectral1D::new(&grid)?;
    let eig = spectral
        .wavenumbers()
        .iter()
        .map(|k| config.alpha * k * k - k.powi(4))
        .collect();
    let nonlinear = QuadraticAdvection::new(&spectral);
    Etdrk4::new(grid, config.dt, eig, nonlinear)
}

pub fn ks_initial_state(grid: &Grid1D) -> StateVector {
    let values = grid
        .points()
        .iter()
        .map(|x| (x / 16.0).cos() * (1.0 + (x / 16.0).sin()))
        .collect();
    StateVector::new(Grid::Line(*grid), 1, values).expect("length matches grid")
}
