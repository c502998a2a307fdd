use serde::{Deserialize, Serialize};

use super::{Grid, NumericsError, Result};

/// Discretized field values on a grid; `field_count` interleaved fields per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    values: Vec<f64>,
    field_count: usize,
    grid: Grid,
}

impl StateVector {
    pub fn new(grid: Grid, field_count: usize, values: Vec<f64>) -> Result<Self> {
        let expected = grid.point_count() * field_count;
        if field_count == 0 || values.len() != expected {
            return Err(NumericsError::LengthMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Self {
            values,
            field_count,
            grid,
        })
    }

    pub fn zeros(grid: Grid, field_count: usize) -> Self {
        let n = grid.point_count() * field_count;
        Self {
            values: vec![0.0; n],
            field_count,
            grid,
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            values: vec![value],
            field_count: 1,
            grid: Grid::Point,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn field_count(&self) -> usize {
        self.field_count
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// New state on the same grid with replaced values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid, self.field_count, values)
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.grid == other.grid && self.field_count == other.field_count
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_layout(other) {
            return Err(NumericsError::GridMismatch);
        }
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            field_count: self.field_count,
            grid: self.grid,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// `Σ v_i · w` per field, with `w` the quadrature weight.
    pub fn total_mass(&self) -> f64 {
        self.grid.quadrature_weight() * self.values.iter().sum::<f64>()
    }
}
