//! Grids, state fields, norms, quadrature and Fourier spectral primitives.
//!
//! Everything here is a pure function of its inputs. Reported errors use the
//! quadrature-weighted [`discrete_l2_norm`]; training losses elsewhere use the
//! plain mean of squared entries ([`mean_squared`]).

mod grid;
mod quadrature;
mod spectral;
mod state;

pub use grid::{Grid, Grid1D, Grid2D};
pub use quadrature::trapezoid_integral_2d;
pub use spectral::{
    coefficient_space_norm, spectral_fourth_derivative, spectral_second_derivative, Spectral1D,
};
pub use state::StateVector;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("operation requires a periodic grid")]
    NotPeriodic,
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Index and value of the first non-finite entry, if any.
pub fn first_non_finite(values: &[f64]) -> Option<(usize, f64)> {
    values
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite())
        .map(|(i, v)| (i, *v))
}

fn check_finite(values: &[f64]) -> Result<()> {
    match first_non_finite(values) {
        Some((index, value)) => Err(NumericsError::NonFinite { index, value }),
        None => Ok(()),
    }
}

/// `sqrt(w * sum v_i^2)` with `w` the grid's quadrature weight.
pub fn discrete_l2_norm(state: &StateVector) -> Result<f64> {
    check_finite(state.values())?;
    let w = state.grid().quadrature_weight();
    let sum: f64 = state.values().iter().map(|v| v * v).sum();
    Ok((w * sum).sqrt())
}

/// `‖a − b‖ / ‖b‖`, with `b` the reference.
///
/// Falls back to the absolute error `‖a − b‖` when `‖b‖ = 0`.
pub fn relative_l2_error(a: &StateVector, b: &StateVector) -> Result<f64> {
    let diff = a.sub(b)?;
    let num = discrete_l2_norm(&diff)?;
    let den = discrete_l2_norm(b)?;
    if den == 0.0 {
        Ok(num)
    } else {
        Ok(num / den)
    }
}

/// Plain mean of squared entries, the loss-side convention.
pub fn mean_squared(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_line(n: usize) -> Grid {
        Grid::Line(Grid1D::new(0.0, 1.0, n, false).unwrap())
    }

    #[test]
    fn norm_of_zero_state_is_zero() {
        let s = StateVector::zeros(unit_line(11), 1);
        assert_eq!(discrete_l2_norm(&s).unwrap(), 0.0);
        let g2 = Grid::Plane(Grid2D::unit_square(4, 4).unwrap());
        assert_eq!(discrete_l2_norm(&StateVector::zeros(g2, 2)).unwrap(), 0.0);
    }

    #[test]
    fn norm_of_constant_state() {
        let s = StateVector::new(unit_line(11), 1, vec![1.0; 11]).unwrap();
        let expected = (0.1f64 * 11.0).sqrt();
        assert!((discrete_l2_norm(&s).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 1.0488).abs() < 1e-4);
    }

    #[test]
    fn norm_of_sine_matches_quadrature() {
        let g = Grid1D::new(0.0, 1.0, 101, false).unwrap();
        let vals: Vec<f64> = g.points().iter().map(|x| (std::f64::consts::PI * x).sin()).collect();
        let s = StateVector::new(Grid::Line(g), 1, vals).unwrap();
        assert!((discrete_l2_norm(&s).unwrap() - 0.5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn norm_reports_first_non_finite_index() {
        let mut v = vec![1.0; 11];
        v[4] = f64::NAN;
        v[7] = f64::INFINITY;
        let s = StateVector::new(unit_line(11), 1, v).unwrap();
        match discrete_l2_norm(&s) {
            Err(NumericsError::NonFinite { index, .. }) => assert_eq!(index, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn relative_error_identities() {
        let b = StateVector::new(unit_line(5), 1, vec![1.0, -2.0, 3.0, 0.5, 4.0]).unwrap();
        assert_eq!(relative_l2_error(&b, &b).unwrap(), 0.0);
        let a = b.scaled(2.0);
        assert!((relative_l2_error(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn relative_error_single_entry_perturbation_matches_loop() {
        let vals = vec![0.3, -1.2, 2.5, 0.8, -0.1, 1.7];
        let b = StateVector::new(unit_line(6), 1, vals.clone()).unwrap();
        let mut pert = vals.clone();
        pert[3] += 0.25;
        let a = StateVector::new(unit_line(6), 1, pert.clone()).unwrap();

        // independent elementwise loop, weights cancel in the ratio
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..vals.len() {
            num += (pert[i] - vals[i]) * (pert[i] - vals[i]);
            den += vals[i] * vals[i];
        }
        let expected = (num / den).sqrt();
        assert!((relative_l2_error(&a, &b).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn relative_error_zero_reference_is_absolute() {
        let b = StateVector::zeros(unit_line(11), 1);
        let a = StateVector::new(unit_line(11), 1, vec![1.0; 11]).unwrap();
        let abs = discrete_l2_norm(&a).unwrap();
        assert_eq!(relative_l2_error(&a, &b).unwrap(), abs);
    }

    #[test]
    fn relative_error_rejects_grid_mismatch() {
        let a = StateVector::zeros(unit_line(11), 1);
        let b = StateVector::zeros(unit_line(12), 1);
        assert_eq!(relative_l2_error(&a, &b), Err(NumericsError::GridMismatch));
    }

    fn state_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 16)
    }

    proptest! {
        #[test]
        fn norm_is_homogeneous(v in state_strategy(), c in -5.0f64..5.0) {
            let s = StateVector::new(unit_line(16), 1, v).unwrap();
            let lhs = discrete_l2_norm(&s.scaled(c)).unwrap();
            let rhs = c.abs() * discrete_l2_norm(&s).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn norm_satisfies_triangle_inequality(a in state_strategy(), b in state_strategy()) {
            let sa = StateVector::new(unit_line(16), 1, a).unwrap();
            let sb = StateVector::new(unit_line(16), 1, b).unwrap();
            let sum = sa.add(&sb).unwrap();
            let lhs = discrete_l2_norm(&sum).unwrap();
            let rhs = discrete_l2_norm(&sa).unwrap() + discrete_l2_norm(&sb).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }
}
