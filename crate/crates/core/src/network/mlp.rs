use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, ArrayViewMut2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NetworkError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
}

/// Kaiming uniform with gain 1: `U(-√(3/fan_in), √(3/fan_in))`, zero biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    #[default]
    KaimingUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default)]
    pub init: InitScheme,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(NetworkError::InvalidConfig("input and output dims must be ≥ 1".into()));
        }
        if self.hidden_layers > 0 && self.hidden_width == 0 {
            return Err(NetworkError::InvalidConfig("hidden width must be ≥ 1".into()));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every affine layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = vec![self.input_dim];
        dims.extend(std::iter::repeat(self.hidden_width).take(self.hidden_layers));
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| i * o + o).sum()
    }
}

/// Per-coordinate affine map `y = scale · x + shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        Self {
            scale: vec![1.0; dim],
            shift: vec![0.0; dim],
        }
    }

    /// Maps each `[lower_i, upper_i]` onto `[-1, 1]`. Degenerate ranges map to 0.
    pub fn to_unit_interval(ranges: &[(f64, f64)]) -> Self {
        let (scale, shift) = ranges
            .iter()
            .map(|&(lo, hi)| {
                if hi > lo {
                    let s = 2.0 / (hi - lo);
                    (s, -1.0 - s * lo)
                } else {
                    (0.0, 0.0)
                }
            })
            .unzip();
        Self { scale, shift }
    }

    /// Maps `[-1, 1]` onto each `[lower_i, upper_i]`; the output-side inverse
    /// of [`AffineMap::to_unit_interval`].
    pub fn from_unit_interval(ranges: &[(f64, f64)]) -> Self {
        let (scale, shift) = ranges.iter().map(|&(lo, hi)| (0.5 * (hi - lo), 0.5 * (hi + lo))).unzip();
        Self { scale, shift }
    }

    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    fn apply(&self, x: &mut Array2<f64>) {
        for mut row in x.rows_mut() {
            for ((v, s), b) in row.iter_mut().zip(&self.scale).zip(&self.shift) {
                *v = s * *v + b;
            }
        }
    }

    fn scale_columns(&self, x: &mut Array2<f64>) {
        for mut row in x.rows_mut() {
            for (v, s) in row.iter_mut().zip(&self.scale) {
                *v *= s;
            }
        }
    }
}

/// Intermediate values of one forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Layer inputs: the normalized input, then each hidden activation.
    layer_inputs: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }

    pub fn into_output(self) -> Array2<f64> {
        self.output
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub params: Vec<f64>,
    pub inputs: Array2<f64>,
}

/// Fully connected network, tanh on hidden layers and a linear output.
///
/// Parameters live in one flat vector; layer `l` stores its weights as an
/// `(in, out)` row-major block followed by its bias, so `H = X W + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    config: NetworkConfig,
    input_map: AffineMap,
    output_map: AffineMap,
    params: Vec<f64>,
}

impl Mlp {
    pub fn new(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = Vec::with_capacity(config.parameter_count());
        for (fan_in, fan_out) in config.layer_shapes() {
            let bound = (3.0 / fan_in as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.gen_range(-bound..bound)));
            params.extend(std::iter::repeat(0.0).take(fan_out));
        }
        Ok(Self {
            input_map: AffineMap::identity(config.input_dim),
            output_map: AffineMap::identity(config.output_dim),
            config,
            params,
        })
    }

    pub fn with_params(config: NetworkConfig, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::new(config)?;
        net.set_params(params)?;
        Ok(net)
    }

    pub fn with_input_map(mut self, map: AffineMap) -> Result<Self> {
        check_len("input map", self.config.input_dim, map.dim())?;
        self.input_map = map;
        Ok(self)
    }

    pub fn with_output_map(mut self, map: AffineMap) -> Result<Self> {
        check_len("output map", self.config.output_dim, map.dim())?;
        self.output_map = map;
        Ok(self)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn input_map(&self) -> &AffineMap {
        &self.input_map
    }

    pub fn output_map(&self) -> &AffineMap {
        &self.output_map
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        check_len("parameter vector", self.config.parameter_count(), params.len())?;
        self.params = params;
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    /// Structural checks after deserialization.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        check_len("parameter vector", self.config.parameter_count(), self.params.len())?;
        check_len("input map", self.config.input_dim, self.input_map.dim())?;
        check_len("output map", self.config.output_dim, self.output_map.dim())?;
        check_len("input shift", self.config.input_dim, self.input_map.shift.len())?;
        check_len("output shift", self.config.output_dim, self.output_map.shift.len())?;
        if let Some(i) = self.params.iter().position(|p| !p.is_finite()) {
            return Err(NetworkError::NonFiniteParameter { index: i, value: self.params[i] });
        }
        Ok(())
    }

    fn layers(&self) -> Vec<(ArrayView2<'_, f64>, &[f64])> {
        let mut off = 0;
        self.config
            .layer_shapes()
            .into_iter()
            .map(|(i, o)| {
                let w = ArrayView2::from_shape((i, o), &self.params[off..off + i * o]).unwrap();
                let b = &self.params[off + i * o..off + i * o + o];
                off += i * o + o;
                (w, b)
            })
            .collect()
    }

    pub fn forward(&self, inputs: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(inputs)?.output)
    }

    pub fn forward_cached(&self, inputs: &Array2<f64>) -> Result<ForwardCache> {
        check_len("input columns", self.config.input_dim, inputs.ncols())?;
        let mut h = inputs.clone();
        self.input_map.apply(&mut h);
        let layers = self.layers();
        let last = layers.len() - 1;
        let mut layer_inputs = Vec::with_capacity(layers.len());
        for (l, (w, b)) in layers.iter().enumerate() {
            let mut z = h.dot(w);
            for mut row in z.rows_mut() {
                row.iter_mut().zip(b.iter()).for_each(|(v, b)| *v += b);
            }
            if l < last {
                z.mapv_inplace(f64::tanh);
            }
            layer_inputs.push(h);
            h = z;
        }
        self.output_map.apply(&mut h);
        Ok(ForwardCache {
            layer_inputs,
            output: h,
        })
    }

    /// Reverse mode for `Σ adjoint ⊙ output`: parameter and input gradients.
    pub fn backward(&self, cache: &ForwardCache, adjoints: &Array2<f64>) -> Result<Gradients> {
        check_len("adjoint rows", cache.output.nrows(), adjoints.nrows())?;
        check_len("adjoint columns", self.config.output_dim, adjoints.ncols())?;
        let layers = self.layers();
        let shapes = self.config.layer_shapes();
        let mut grads = vec![0.0; self.params.len()];
        let mut offsets = Vec::with_capacity(shapes.len());
        let mut off = 0;
        for (i, o) in &shapes {
            offsets.push(off);
            off += i * o + o;
        }
        let mut g = adjoints.clone();
        self.output_map.scale_columns(&mut g);
        for l in (0..layers.len()).rev() {
            let (w, _) = &layers[l];
            let x = &cache.layer_inputs[l];
            let (fan_in, fan_out) = shapes[l];
            let o = offsets[l];
            let mut gw = ArrayViewMut2::from_shape((fan_in, fan_out), &mut grads[o..o + fan_in * fan_out])
                .expect("layer slice matches its shape");
            general_mat_mul(1.0, &x.t(), &g, 0.0, &mut gw);
            let gb = g.sum_axis(Axis(0));
            grads[o + fan_in * fan_out..o + fan_in * fan_out + fan_out]
                .iter_mut()
                .zip(gb.iter())
                .for_each(|(d, s)| *d = *s);
            let mut gx = g.dot(&w.t());
            if l > 0 {
                gx.zip_mut_with(x, |d, h| *d *= 1.0 - h * h);
            }
            g = gx;
        }
        self.input_map.scale_columns(&mut g);
        Ok(Gradients {
            params: grads,
            inputs: g,
        })
    }
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(NetworkError::Shape { what, expected, actual })
    }
}
