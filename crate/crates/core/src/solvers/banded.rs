//! Banded matrices and their LU factorization without pivoting.
//!
//! Without row exchanges the factors keep the band of the input, so storage
//! and work stay `O(n · (lower + upper))` per row. Only safe for matrices that
//! need no pivoting, such as diagonally dominant ones.

use super::SolverError;

/// Square matrix with `lower` sub- and `upper` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    pub fn identity(n: usize, lower: usize, upper: usize) -> Self {
        let mut m = Self::zeros(n, lower, upper);
        for i in 0..n {
            m.add(i, i, 1.0);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n || j + self.lower < i || j > i + self.upper {
            return None;
        }
        Some(i * (self.lower + self.upper + 1) + (j + self.lower - i))
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// # Panics
    /// If `(i, j)` lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band"));
        self.data[s] += value;
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let (lo, hi) = self.row_span(i);
            *o = self.row_band(i, lo, hi + 1).iter().zip(&x[lo..=hi]).map(|(a, b)| a * b).sum();
        }
    }

    fn row_span(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(self.lower), (i + self.upper).min(self.n - 1))
    }

    /// Stored entries `(i, lo..hi)` as one contiguous slice.
    fn row_band(&self, i: usize, lo: usize, hi: usize) -> &[f64] {
        let base = i * (self.lower + self.upper + 1) + self.lower - i;
        &self.data[base + lo..base + hi]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.lower);
            let hi = (i + self.upper).min(self.n - 1);
            for (j, s) in sums.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *s += self.get(i, j);
            }
        }
        sums
    }
}

/// In-place LU factors `A = LU`, unit lower `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedLu {
    factors: BandedMatrix,
}

impl BandedLu {
    pub fn factor(matrix: BandedMatrix) -> Result<Self, SolverError> {
        let mut a = matrix;
        let n = a.n;
        for k in 0..n {
            let pivot = a.get(k, k);
            if !pivot.is_finite() || pivot.abs() < 1e-300 {
                return Err(SolverError::InvalidParams(format!(
                    "zero pivot {pivot} at row {k}"
                )));
            }
            let row_end = (k + a.lower).min(n - 1);
            let col_end = (k + a.upper).min(n - 1);
            let w = a.lower + a.upper + 1;
            for i in k + 1..=row_end {
                let base_i = i * w + a.lower - i;
                let l = a.data[base_i + k] / pivot;
                a.data[base_i + k] = l;
                if l == 0.0 {
                    continue;
                }
                let base_k = k * w + a.lower - k;
                let (head, tail) = a.data.split_at_mut(base_i + k + 1);
                let pivot_row = &head[base_k + k + 1..=base_k + col_end];
                tail[..col_end - k].iter_mut().zip(pivot_row).for_each(|(d, p)| *d -= l * p);
            }
        }
        Ok(Self { factors: a })
    }

    pub fn size(&self) -> usize {
        self.factors.n
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let a = &self.factors;
        let n = a.n;
        for i in 0..n {
            let (lo, _) = a.row_span(i);
            let acc: f64 = a.row_band(i, lo, i).iter().zip(&x[lo..i]).map(|(l, v)| l * v).sum();
            x[i] -= acc;
        }
        for i in (0..n).rev() {
            let (_, hi) = a.row_span(i);
            let acc: f64 = a.row_band(i, i + 1, hi + 1).iter().zip(&x[i + 1..=hi]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - acc) / a.row_band(i, i, i + 1)[0];
        }
    }
}
