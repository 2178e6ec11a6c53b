//! Feedforward networks with manual backpropagation.

use crate::error::{Error, Result};
use crate::nn::matrix::Matrix;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Elu,
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Elu => {
                if x > 0.0 {
                    x
                } else {
                    x.exp() - 1.0
                }
            }
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative evaluated at pre-activation `x`.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Elu => {
                if x > 0.0 {
                    1.0
                } else {
                    x.exp()
                }
            }
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Activation::Elu => 0,
            Activation::Relu => 1,
            Activation::Identity => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Activation::Elu),
            1 => Ok(Activation::Relu),
            2 => Ok(Activation::Identity),
            other => Err(Error::BadFormat(format!("unknown activation tag {other}"))),
        }
    }
}

/// One dense layer: `y = act(x W + b)` with `W` stored `(in x out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Per-layer tensors saved by a cached forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// Inputs to each layer; `inputs[0]` is the network input.
    inputs: Vec<Matrix>,
    /// Pre-activation values of each layer.
    pres: Vec<Matrix>,
    rows: usize,
}

/// Parameter gradients in `param_blocks` order: `[dW0, db0, dW1, db1, ...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub blocks: Vec<Vec<f64>>,
}

impl Grads {
    pub fn zeros_like(blocks: &[&[f64]]) -> Self {
        Self {
            blocks: blocks.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|g| g * g)
            .sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for block in &mut self.blocks {
            for g in block.iter_mut() {
                *g *= factor;
            }
        }
    }

    pub fn concat(mut parts: Vec<Grads>) -> Grads {
        let mut blocks = Vec::new();
        for part in parts.drain(..) {
            blocks.extend(part.blocks);
        }
        Grads { blocks }
    }
}

impl Mlp {
    /// New network with uniform `U(-1/sqrt(in), 1/sqrt(in))` init per layer.
    pub fn new(sizes: &[usize], hidden: Activation, output: Activation, rng: &mut Rng) -> Self {
        assert!(sizes.len() >= 2, "mlp needs at least input and output sizes");
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for i in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[i], sizes[i + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let weights = Matrix::from_fn(fan_in, fan_out, |_, _| rng.range(-bound, bound));
            let bias = (0..fan_out).map(|_| rng.range(-bound, bound)).collect();
            let activation = if i + 2 == sizes.len() { output } else { hidden };
            layers.push(Layer {
                weights,
                bias,
                activation,
            });
        }
        Self { layers }
    }

    /// All-zero parameters; useful for fixed-point tests.
    pub fn zeros(sizes: &[usize], hidden: Activation, output: Activation) -> Self {
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for i in 0..sizes.len() - 1 {
            let activation = if i + 2 == sizes.len() { output } else { hidden };
            layers.push(Layer {
                weights: Matrix::zeros(sizes[i], sizes[i + 1]),
                bias: vec![0.0; sizes[i + 1]],
                activation,
            });
        }
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().weights.cols()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(self.layers.iter().map(|l| l.weights.cols()));
        sizes
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data().len() + l.bias.len())
            .sum()
    }

    pub fn param_blocks(&self) -> Vec<&[f64]> {
        let mut blocks = Vec::with_capacity(self.layers.len() * 2);
        for layer in &self.layers {
            blocks.push(layer.weights.data());
            blocks.push(layer.bias.as_slice());
        }
        blocks
    }

    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut blocks = Vec::with_capacity(self.layers.len() * 2);
        for layer in &mut self.layers {
            blocks.push(layer.weights.data_mut());
            blocks.push(layer.bias.as_mut_slice());
        }
        blocks
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "mlp forward input",
                expected: self.input_dim(),
                actual: x.cols(),
            });
        }
        Ok(())
    }

    /// Forward pass without caching.
    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let mut current = x.clone();
        for layer in &self.layers {
            let mut pre = current.matmul(&layer.weights);
            pre.add_row_vector(&layer.bias);
            for v in pre.data_mut() {
                *v = layer.activation.apply(*v);
            }
            current = pre;
        }
        Ok(current)
    }

    /// Forward pass retaining what backward needs.
    pub fn forward_cached(&self, x: &Matrix) -> Result<(Matrix, MlpCache)> {
        self.check_input(x)?;
        let rows = x.rows();
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pres = Vec::with_capacity(self.layers.len());
        let mut current = x.clone();
        for layer in &self.layers {
            let mut pre = current.matmul(&layer.weights);
            pre.add_row_vector(&layer.bias);
            inputs.push(current);
            let mut out = pre.clone();
            for v in out.data_mut() {
                *v = layer.activation.apply(*v);
            }
            pres.push(pre);
            current = out;
        }
        Ok((current, MlpCache { inputs, pres, rows }))
    }

    /// Backpropagates `d_out` through the cached pass.
    ///
    /// Returns parameter gradients and the gradient w.r.t. the input.
    pub fn backward(&self, cache: &MlpCache, d_out: &Matrix) -> Result<(Grads, Matrix)> {
        if d_out.rows() != cache.rows || d_out.cols() != self.output_dim() {
            return Err(Error::ShapeMismatch {
                context: "mlp backward output gradient",
                expected: cache.rows * self.output_dim(),
                actual: d_out.rows() * d_out.cols(),
            });
        }
        if cache.inputs.len() != self.layers.len() {
            return Err(Error::ShapeMismatch {
                context: "mlp backward cache",
                expected: self.layers.len(),
                actual: cache.inputs.len(),
            });
        }
        let mut blocks = vec![Vec::new(); self.layers.len() * 2];
        let mut upstream = d_out.clone();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let pre = &cache.pres[idx];
            let mut d_pre = upstream;
            for (g, &p) in d_pre.data_mut().iter_mut().zip(pre.data()) {
                *g *= layer.activation.derivative(p);
            }
            let d_weights = cache.inputs[idx].matmul_lhs_transposed(&d_pre);
            let d_bias = d_pre.column_sums();
            upstream = d_pre.matmul_rhs_transposed(&layer.weights);
            blocks[idx * 2] = d_weights.data().to_vec();
            blocks[idx * 2 + 1] = d_bias;
        }
        Ok((Grads { blocks }, upstream))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weight_net_outputs_bias() {
        let mut net = Mlp::zeros(&[3, 2], Activation::Elu, Activation::Identity);
        net.layers[0].bias = vec![0.5, -1.5];
        let x = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, -1.0, 0.0, 4.0]);
        let y = net.forward(&x).unwrap();
        assert_eq!(y.row(0), &[0.5, -1.5]);
        assert_eq!(y.row(1), &[0.5, -1.5]);
    }

    #[test]
    fn single_identity_layer_is_affine() {
        let mut rng = Rng::seeded(4);
        let net = Mlp::new(&[3, 2], Activation::Elu, Activation::Identity, &mut rng);
        let x = Matrix::from_vec(1, 3, vec![0.3, -0.7, 1.1]);
        let y = net.forward(&x).unwrap();
        let w = &net.layers[0].weights;
        for j in 0..2 {
            let expect: f64 =
                (0..3).map(|i| x.get(0, i) * w.get(i, j)).sum::<f64>() + net.layers[0].bias[j];
            assert!((y.get(0, j) - expect).abs() < 1e-15);
        }
    }

    // Independent straight-line re-evaluation with plain nested loops.
    fn naive_forward(net: &Mlp, input: &[f64]) -> Vec<f64> {
        let mut current = input.to_vec();
        for layer in &net.layers {
            let (fan_in, fan_out) = (layer.weights.rows(), layer.weights.cols());
            let mut next = vec![0.0; fan_out];
            for j in 0..fan_out {
                let mut acc = layer.bias[j];
                for i in 0..fan_in {
                    acc += current[i] * layer.weights.get(i, j);
                }
                next[j] = layer.activation.apply(acc);
            }
            current = next;
        }
        current
    }

    #[test]
    fn forward_matches_straight_line_reevaluation() {
        let mut rng = Rng::seeded(21);
        let net = Mlp::new(&[5, 7, 4], Activation::Elu, Activation::Identity, &mut rng);
        for _ in 0..20 {
            let input: Vec<f64> = (0..5).map(|_| rng.range(-2.0, 2.0)).collect();
            let x = Matrix::from_vec(1, 5, input.clone());
            let fast = net.forward(&x).unwrap();
            let slow = naive_forward(&net, &input);
            for j in 0..4 {
                assert!((fast.get(0, j) - slow[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut rng = Rng::seeded(0);
        let net = Mlp::new(&[4, 2], Activation::Elu, Activation::Identity, &mut rng);
        let x = Matrix::zeros(1, 3);
        assert!(net.forward(&x).is_err());
    }

    #[test]
    fn zero_output_gradient_gives_zero_parameter_gradients() {
        let mut rng = Rng::seeded(8);
        let net = Mlp::new(&[4, 6, 2], Activation::Elu, Activation::Identity, &mut rng);
        let x = Matrix::from_fn(3, 4, |i, j| (i + j) as f64 * 0.1);
        let (_, cache) = net.forward_cached(&x).unwrap();
        let (grads, d_in) = net.backward(&cache, &Matrix::zeros(3, 2)).unwrap();
        assert!(grads.blocks.iter().all(|b| b.iter().all(|&g| g == 0.0)));
        assert!(d_in.data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn single_linear_layer_weight_gradient_is_outer_product() {
        let mut rng = Rng::seeded(9);
        let net = Mlp::new(&[3, 2], Activation::Elu, Activation::Identity, &mut rng);
        let x = Matrix::from_vec(1, 3, vec![0.5, -1.0, 2.0]);
        let (_, cache) = net.forward_cached(&x).unwrap();
        let g = Matrix::from_vec(1, 2, vec![0.25, -0.75]);
        let (grads, _) = net.backward(&cache, &g).unwrap();
        // dW[i][j] = x[i] * g[j], stored row-major (in x out)
        for i in 0..3 {
            for j in 0..2 {
                let expect = x.get(0, i) * g.get(0, j);
                assert!((grads.blocks[0][i * 2 + j] - expect).abs() < 1e-15);
            }
        }
        assert_eq!(grads.blocks[1], vec![0.25, -0.75]);
    }

    #[test]
    fn stale_cache_shape_is_rejected() {
        let mut rng = Rng::seeded(10);
        let net = Mlp::new(&[3, 2], Activation::Elu, Activation::Identity, &mut rng);
        let (_, cache) = net.forward_cached(&Matrix::zeros(4, 3)).unwrap();
        assert!(net.backward(&cache, &Matrix::zeros(3, 2)).is_err());
    }
}
