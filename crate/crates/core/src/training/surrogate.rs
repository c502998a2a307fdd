use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::batch::build_time_level_batch;
use super::{Result, TrainingError};
use crate::network::{ForwardCache, Mlp};
use crate::numerics::{Grid, StateVector};

/// How network rows map onto a solver state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateLayout {
    /// One row per grid point, `[t, params.., x..] -> fields`.
    Pointwise,
    /// One row per state, `[t, params..] -> every value`.
    WholeState,
}

/// Hard constraint applied to each predicted state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutputConstraint {
    /// Shift every state to the given mean value.
    FixedMean { mean: f64 },
}

/// A network together with the recipe turning its rows into solver states.
///
/// Input columns are ordered `t` (when time is an input), then the physical
/// parameters, then the spatial coordinates (pointwise layout only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surrogate {
    net: Mlp,
    grid: Grid,
    field_count: usize,
    layout: SurrogateLayout,
    time_input: bool,
    param_dim: usize,
    constraint: Option<OutputConstraint>,
}

/// States predicted at several time levels plus what backward needs.
#[derive(Debug, Clone)]
pub struct SurrogateForward {
    cache: ForwardCache,
    pub states: Vec<StateVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateGradients {
    pub params: Vec<f64>,
    /// Gradient with respect to the physical-parameter inputs.
    pub inputs: Vec<f64>,
}

impl Surrogate {
    pub fn input_dim_for(layout: SurrogateLayout, grid: &Grid, time_input: bool, param_dim: usize) -> usize {
        let spatial = match layout {
            SurrogateLayout::Pointwise => grid.spatial_dim(),
            SurrogateLayout::WholeState => 0,
        };
        time_input as usize + param_dim + spatial
    }

    pub fn output_dim_for(layout: SurrogateLayout, grid: &Grid, field_count: usize) -> usize {
        match layout {
            SurrogateLayout::Pointwise => field_count,
            SurrogateLayout::WholeState => grid.point_count() * field_count,
        }
    }

    pub fn new(
        net: Mlp,
        grid: Grid,
        field_count: usize,
        layout: SurrogateLayout,
        time_input: bool,
        param_dim: usize,
        constraint: Option<OutputConstraint>,
    ) -> Result<Self> {
        let s = Self {
            net,
            grid,
            field_count,
            layout,
            time_input,
            param_dim,
            constraint,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.net.validate()?;
        let cfg = self.net.config();
        let want_in = Self::input_dim_for(self.layout, &self.grid, self.time_input, self.param_dim);
        let want_out = Self::output_dim_for(self.layout, &self.grid, self.field_count);
        if cfg.input_dim != want_in || cfg.output_dim != want_out {
            return Err(TrainingError::InvalidTask(format!(
                "network is {}->{}, surrogate needs {want_in}->{want_out}",
                cfg.input_dim, cfg.output_dim
            )));
        }
        Ok(())
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn field_count(&self) -> usize {
        self.field_count
    }

    pub fn layout(&self) -> SurrogateLayout {
        self.layout
    }

    pub fn time_input(&self) -> bool {
        self.time_input
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    /// Spatial coordinates fed per row; a single empty row for whole states.
    pub fn row_coordinates(&self) -> Vec<Vec<f64>> {
        match self.layout {
            SurrogateLayout::Pointwise => self.grid.coordinates(),
            SurrogateLayout::WholeState => vec![Vec::new()],
        }
    }

    /// Network input for the given time levels. Times are ignored when the
    /// surrogate has no time input; pass one dummy level then.
    pub fn level_inputs(&self, times: &[f64], params: &[f64]) -> Result<Array2<f64>> {
        if params.len() != self.param_dim {
            return Err(TrainingError::InvalidTask(format!(
                "expected {} physical parameters, got {}",
                self.param_dim,
                params.len()
            )));
        }
        Ok(build_time_level_batch(times, params, &self.row_coordinates(), self.time_input))
    }

    pub fn forward(&self, times: &[f64], params: &[f64]) -> Result<SurrogateForward> {
        self.forward_many(times, &[params])
    }

    /// One network pass for several parameter sets. States are ordered by
    /// parameter set, then by time level.
    pub fn forward_many(&self, times: &[f64], param_sets: &[&[f64]]) -> Result<SurrogateForward> {
        let blocks = param_sets
            .iter()
            .map(|p| self.level_inputs(times, p))
            .collect::<Result<Vec<_>>>()?;
        let x = if blocks.len() == 1 {
            blocks.into_iter().next().expect("one block")
        } else {
            let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
            ndarray::concatenate(ndarray::Axis(0), &views).map_err(|e| TrainingError::InvalidTask(e.to_string()))?
        };
        let cache = self.net.forward_cached(&x)?;
        let y = cache.output();
        let n = self.grid.point_count();
        let f = self.field_count;
        let levels = times.len() * param_sets.len();
        let mut states = Vec::with_capacity(levels);
        for level in 0..levels {
            let mut values = Vec::with_capacity(n * f);
            match self.layout {
                SurrogateLayout::Pointwise => {
                    for p in 0..n {
                        values.extend(y.row(level * n + p).iter());
                    }
                }
                SurrogateLayout::WholeState => values.extend(y.row(level).iter()),
            }
            if let Some(OutputConstraint::FixedMean { mean }) = self.constraint {
                let m = values.iter().sum::<f64>() / values.len() as f64;
                values.iter_mut().for_each(|v| *v += mean - m);
            }
            states.push(StateVector::new(self.grid, f, values)?);
        }
        Ok(SurrogateForward { cache, states })
    }

    pub fn predict(&self, t: f64, params: &[f64]) -> Result<StateVector> {
        Ok(self.forward(&[t], params)?.states.remove(0))
    }

    pub fn predict_levels(&self, times: &[f64], params: &[f64]) -> Result<Vec<StateVector>> {
        Ok(self.forward(times, params)?.states)
    }

    /// Reverse mode for `Σ_levels adjoint · state`. Input gradients are summed
    /// over every parameter set of a stacked forward.
    pub fn backward(&self, fw: &SurrogateForward, adjoints: &[Vec<f64>]) -> Result<SurrogateGradients> {
        if adjoints.len() != fw.states.len() {
            return Err(TrainingError::InvalidTask(format!(
                "{} adjoints for {} levels",
                adjoints.len(),
                fw.states.len()
            )));
        }
        let n = self.grid.point_count();
        let f = self.field_count;
        let rows = fw.cache.output().nrows();
        let cols = fw.cache.output().ncols();
        let mut g = Array2::zeros((rows, cols));
        for (level, adj) in adjoints.iter().enumerate() {
            if adj.len() != n * f {
                return Err(TrainingError::InvalidTask(format!(
                    "adjoint of length {} for a state of length {}",
                    adj.len(),
                    n * f
                )));
            }
            let mut adj = adj.clone();
            if self.constraint.is_some() {
                let m = adj.iter().sum::<f64>() / adj.len() as f64;
                adj.iter_mut().for_each(|a| *a -= m);
            }
            match self.layout {
                SurrogateLayout::Pointwise => {
                    for p in 0..n {
                        for c in 0..f {
                            g[[level * n + p, c]] = adj[p * f + c];
                        }
                    }
                }
                SurrogateLayout::WholeState => {
                    g.row_mut(level).iter_mut().zip(&adj).for_each(|(d, a)| *d = *a);
                }
            }
        }
        let grads = self.net.backward(&fw.cache, &g)?;
        let first = self.time_input as usize;
        let inputs = (first..first + self.param_dim)
            .map(|c| grads.inputs.column(c).sum())
            .collect();
        Ok(SurrogateGradients {
            params: grads.params,
            inputs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkConfig;
    use crate::numerics::{Grid1D, Grid2D};

    fn net(i: usize, o: usize, seed: u64) -> Mlp {
        Mlp::new(NetworkConfig {
            input_dim: i,
            output_dim: o,
            hidden_layers: 2,
            hidden_width: 6,
            activation: Default::default(),
            init: Default::default(),
            seed,
        })
        .unwrap()
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let grid = Grid::Line(Grid1D::new(0.0, 1.0, 5, false).unwrap());
        assert!(Surrogate::new(net(3, 1, 0), grid, 1, SurrogateLayout::Pointwise, true, 1, None).is_ok());
        assert!(Surrogate::new(net(2, 1, 0), grid, 1, SurrogateLayout::Pointwise, true, 1, None).is_err());
        assert!(Surrogate::new(net(2, 5, 0), grid, 1, SurrogateLayout::WholeState, true, 1, None).is_ok());
    }

    #[test]
    fn pointwise_states_follow_row_order() {
        let g = Grid1D::new(0.0, 1.0, 4, false).unwrap();
        let s = Surrogate::new(net(3, 1, 2), Grid::Line(g), 1, SurrogateLayout::Pointwise, true, 1, None).unwrap();
        let fw = s.forward(&[0.0, 0.5], &[0.3]).unwrap();
        for (level, t) in [0.0, 0.5].iter().enumerate() {
            for (p, x) in g.points().iter().enumerate() {
                let y = s.net().forward(&ndarray::array![[*t, 0.3, *x]]).unwrap();
                assert_eq!(fw.states[level].values()[p], y[[0, 0]]);
            }
        }
    }

    #[test]
    fn fixed_mean_constraint_holds() {
        let g = Grid2D::unit_square(4, 4).unwrap();
        let c = Some(OutputConstraint::FixedMean { mean: 1.0 });
        let s = Surrogate::new(net(1, 16, 3), Grid::Plane(g), 1, SurrogateLayout::WholeState, false, 1, c).unwrap();
        let u = s.predict(0.0, &[1.5]).unwrap();
        assert!((u.total_mass() - 1.0).abs() < 1e-14);
    }

    fn check_gradients(s: &Surrogate, times: &[f64], params: &[f64]) {
        let fw = s.forward(times, params).unwrap();
        let adj: Vec<Vec<f64>> = fw
            .states
            .iter()
            .enumerate()
            .map(|(l, st)| (0..st.len()).map(|i| ((i * 7 + l * 3) as f64 * 0.37).sin()).collect())
            .collect();
        let objective = |s: &Surrogate, p: &[f64]| -> f64 {
            s.forward(times, p)
                .unwrap()
                .states
                .iter()
                .zip(&adj)
                .map(|(st, a)| dot(st.values(), a))
                .sum()
        };
        let g = s.backward(&fw, &adj).unwrap();
        let h = 1e-6;
        for k in 0..s.net().parameter_count() {
            let mut sp = s.clone();
            sp.net_mut().params_mut()[k] += h;
            let up = objective(&sp, params);
            sp.net_mut().params_mut()[k] -= 2.0 * h;
            let down = objective(&sp, params);
            let fd = (up - down) / (2.0 * h);
            assert!((g.params[k] - fd).abs() < 1e-5 * fd.abs().max(1.0), "param {k}");
        }
        for k in 0..params.len() {
            let mut p = params.to_vec();
            p[k] += h;
            let up = objective(s, &p);
            p[k] -= 2.0 * h;
            let down = objective(s, &p);
            let fd = (up - down) / (2.0 * h);
            assert!((g.inputs[k] - fd).abs() < 1e-5 * fd.abs().max(1.0), "input {k}");
        }
    }

    #[test]
    fn pointwise_gradients_match_finite_differences() {
        let g = Grid1D::new(-1.0, 1.0, 5, false).unwrap();
        let s = Surrogate::new(net(4, 1, 4), Grid::Line(g), 1, SurrogateLayout::Pointwise, true, 2, None).unwrap();
        check_gradients(&s, &[0.0, 0.1, 0.2], &[0.3, -0.4]);
    }

    #[test]
    fn constrained_whole_state_gradients_match_finite_differences() {
        let g = Grid2D::unit_square(3, 3).unwrap();
        let c = Some(OutputConstraint::FixedMean { mean: 1.0 });
        let s = Surrogate::new(net(1, 9, 5), Grid::Plane(g), 1, SurrogateLayout::WholeState, false, 1, c).unwrap();
        check_gradients(&s, &[0.0], &[1.2]);
    }
}
