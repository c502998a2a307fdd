use ndarray::{s, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Rows `[t, params.., coords..]` for every level, level-major.
///
/// `coords` holds one entry per row within a level; whole-state surrogates
/// pass a single empty coordinate.
pub fn build_time_level_batch(times: &[f64], params: &[f64], coords: &[Vec<f64>], time_input: bool) -> Array2<f64> {
    let spatial = coords.first().map_or(0, Vec::len);
    let width = time_input as usize + params.len() + spatial;
    let mut out = Array2::zeros((times.len() * coords.len(), width));
    let mut r = 0;
    for &t in times {
        for c in coords {
            let mut row = out.row_mut(r);
            let mut k = 0;
            if time_input {
                row[0] = t;
                k = 1;
            }
            for &p in params {
                row[k] = p;
                k += 1;
            }
            for &x in c {
                row[k] = x;
                k += 1;
            }
            r += 1;
        }
    }
    out
}

/// `2N` rows: the `N` rows at `t_n` that feed the solver, then the `N` rows at
/// `t_{n+1}` compared against its output.
pub fn build_time_pair_batch(t_n: f64, t_next: f64, params: &[f64], coords: &[Vec<f64>]) -> Array2<f64> {
    build_time_level_batch(&[t_n, t_next], params, coords, true)
}

pub fn split_pair_batch(block: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let half = block.nrows() / 2;
    (
        block.slice(s![..half, ..]).to_owned(),
        block.slice(s![half.., ..]).to_owned(),
    )
}

/// Cycles through sample indices in seeded shuffled passes.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    order: Vec<usize>,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl BatchSampler {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut s = Self {
            order: (0..len).collect(),
            cursor: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        s.order.shuffle(&mut s.rng);
        s
    }

    pub fn next_batch(&mut self, size: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(size);
        while out.len() < size.min(self.order.len()) {
            if self.cursor == self.order.len() {
                self.order.shuffle(&mut self.rng);
                self.cursor = 0;
            }
            out.push(self.order[self.cursor]);
            self.cursor += 1;
        }
        out
    }
}
