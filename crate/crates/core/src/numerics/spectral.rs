//! Fourier differentiation on periodic 1D grids.
//!
//! Forward transforms are unnormalized, inverse transforms carry `1/N`.
//! Wavenumbers are ordered `[0, 1, .., N/2, -N/2+1, .., -1]` (even `N`) or
//! `[0, .., (N-1)/2, -(N-1)/2, .., -1]` (odd `N`) and scaled by `2π/L`.
//! The Nyquist mode of an even grid is dropped from odd-order derivatives.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{check_finite, Grid, Grid1D, NumericsError, Result, StateVector};

#[derive(Clone)]
pub struct Spectral1D {
    n: usize,
    length: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Spectral1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral1D")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl Spectral1D {
    pub fn new(grid: &Grid1D) -> Result<Self> {
        if !grid.is_periodic() {
            return Err(NumericsError::NotPeriodic);
        }
        let n = grid.len();
        let scale = 2.0 * std::f64::consts::PI / grid.length();
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
                m as f64 * scale
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            length: grid.length(),
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    fn nyquist_index(&self) -> Option<usize> {
        (self.n % 2 == 0).then_some(self.n / 2)
    }

    /// Fourier symbol `(ik)^order` of the `order`-th derivative.
    pub fn derivative_symbol(&self, order: u32) -> Vec<Complex64> {
        let nyq = self.nyquist_index();
        self.wavenumbers
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                if order % 2 == 1 && Some(j) == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k).powu(order)
                }
            })
            .collect()
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        let inv_n = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * inv_n).collect()
    }

    /// Multiply the spectrum of `values` by `symbol` and transform back.
    pub fn apply_symbol(&self, values: &[f64], symbol: &[Complex64]) -> Vec<f64> {
        let mut coeffs = self.forward(values);
        for (c, s) in coeffs.iter_mut().zip(symbol) {
            *c *= s;
        }
        self.inverse(&coeffs)
    }

    pub fn derivative(&self, values: &[f64], order: u32) -> Vec<f64> {
        self.apply_symbol(values, &self.derivative_symbol(order))
    }

    /// `sqrt(L/N² · Σ|û_k|²)`, equal to the grid-space norm by Parseval.
    pub fn coefficient_norm(&self, values: &[f64]) -> f64 {
        let coeffs = self.forward(values);
        let s: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.length * s / (self.n * self.n) as f64).sqrt()
    }
}

fn periodic_line(state: &StateVector, grid: &Grid1D) -> Result<Spectral1D> {
    if *state.grid() != Grid::Line(*grid) || state.field_count() != 1 {
        return Err(NumericsError::GridMismatch);
    }
    check_finite(state.values())?;
    Spectral1D::new(grid)
}

/// Second derivative by multiplication with `-k²` in Fourier space.
pub fn spectral_second_derivative(state: &StateVector, grid: &Grid1D) -> Result<StateVector> {
    let ops = periodic_line(state, grid)?;
    state.with_values(ops.derivative(state.values(), 2))
}

/// Fourth derivative by multiplication with `k⁴` in Fourier space.
pub fn spectral_fourth_derivative(state: &StateVector, grid: &Grid1D) -> Result<StateVector> {
    let ops = periodic_line(state, grid)?;
    state.with_values(ops.derivative(state.values(), 4))
}

/// Parseval-side norm of a periodic state.
pub fn coefficient_space_norm(state: &StateVector, grid: &Grid1D) -> Result<f64> {
    let ops = periodic_line(state, grid)?;
    Ok(ops.coefficient_norm(state.values()))
}
