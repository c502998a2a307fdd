use super::{check_finite, Grid2D, NumericsError, Result};

/// Domain integral of cell-centered values over a [`Grid2D`].
///
/// Each value is weighted by the cell area. For integrands periodic on the
/// domain this coincides with the composite trapezoid rule on the dual grid
/// and converges spectrally.
pub fn trapezoid_integral_2d(values: &[f64], grid: &Grid2D) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(NumericsError::LengthMismatch {
            expected: grid.len(),
            actual: values.len(),
        });
    }
    check_finite(values)?;
    Ok(values.iter().sum::<f64>() * grid.cell_area())
}
