use serde::{Deserialize, Serialize};

use super::{NumericsError, Result};

/// Uniform 1D grid.
///
/// A periodic grid holds `n_points` distinct samples; the right endpoint is
/// identified with the left one and is not stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    periodic: bool,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, periodic: bool) -> Result<Self> {
        if n_points < 2 {
            return Err(NumericsError::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(NumericsError::InvalidGrid(format!(
                "bad bounds [{x_min}, {x_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
            periodic,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            self.length() / self.n_points as f64
        } else {
            self.length() / (self.n_points - 1) as f64
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }
}

/// Cell-centered uniform 2D grid, stored x-fastest (`index = j * n_x + i`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    x_bounds: (f64, f64),
    y_bounds: (f64, f64),
    n_x: usize,
    n_y: usize,
}

impl Grid2D {
    pub fn new(x_bounds: (f64, f64), y_bounds: (f64, f64), n_x: usize, n_y: usize) -> Result<Self> {
        if n_x == 0 || n_y == 0 {
            return Err(NumericsError::InvalidGrid("zero cells".into()));
        }
        for (lo, hi) in [x_bounds, y_bounds] {
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(NumericsError::InvalidGrid(format!("bad bounds [{lo}, {hi}]")));
            }
        }
        Ok(Self {
            x_bounds,
            y_bounds,
            n_x,
            n_y,
        })
    }

    pub fn unit_square(n_x: usize, n_y: usize) -> Result<Self> {
        Self::new((0.0, 1.0), (0.0, 1.0), n_x, n_y)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn x_bounds(&self) -> (f64, f64) {
        self.x_bounds
    }

    pub fn y_bounds(&self) -> (f64, f64) {
        self.y_bounds
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_bounds.1 - self.x_bounds.0) / self.n_x as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_bounds.1 - self.y_bounds.0) / self.n_y as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_x + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x_bounds.0 + (i as f64 + 0.5) * self.dx(),
            self.y_bounds.0 + (j as f64 + 0.5) * self.dy(),
        )
    }

    /// Cell centers in storage order.
    pub fn cell_centers(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.n_y {
            for i in 0..self.n_x {
                out.push(self.cell_center(i, j));
            }
        }
        out
    }
}

/// Spatial support of a [`StateVector`](super::StateVector).
///
/// `Point` carries ODE states: one location, unit quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    Point,
    Line(Grid1D),
    Plane(Grid2D),
}

impl Grid {
    pub fn point_count(&self) -> usize {
        match self {
            Grid::Point => 1,
            Grid::Line(g) => g.len(),
            Grid::Plane(g) => g.len(),
        }
    }

    pub fn quadrature_weight(&self) -> f64 {
        match self {
            Grid::Point => 1.0,
            Grid::Line(g) => g.spacing(),
            Grid::Plane(g) => g.cell_area(),
        }
    }

    /// Spatial coordinates of every point, one vector per point.
    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        match self {
            Grid::Point => vec![Vec::new()],
            Grid::Line(g) => g.points().into_iter().map(|x| vec![x]).collect(),
            Grid::Plane(g) => g.cell_centers().into_iter().map(|(x, y)| vec![x, y]).collect(),
        }
    }

    pub fn spatial_dim(&self) -> usize {
        match self {
            Grid::Point => 0,
            Grid::Line(_) => 1,
            Grid::Plane(_) => 2,
        }
    }
}
