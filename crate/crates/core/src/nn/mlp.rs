use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NnError, ParamSet};
use crate::tensor::{ExprGraph, NodeId, Tensor, TensorError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
    Tanh,
    Sigmoid,
    Softmax,
    Linear,
}

impl Activation {
    pub fn apply(self, g: &mut ExprGraph, x: NodeId) -> Result<NodeId, TensorError> {
        match self {
            Activation::Relu => g.relu(x),
            Activation::LeakyRelu(s) => g.leaky_relu(x, s),
            Activation::Tanh => g.tanh(x),
            Activation::Sigmoid => g.sigmoid(x),
            Activation::Softmax => g.softmax(x),
            Activation::Linear => Ok(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub width: usize,
    pub activation: Activation,
}

impl Layer {
    pub fn new(width: usize, activation: Activation) -> Self {
        Self { width, activation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden: Vec<Layer>,
    pub output: Layer,
    pub init_seed: u64,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden: Vec<Layer>, output: Layer, init_seed: u64) -> Self {
        Self {
            input_dim,
            hidden,
            output,
            init_seed,
        }
    }

    fn layers(&self) -> impl Iterator<Item = &Layer> {
        self.hidden.iter().chain(std::iter::once(&self.output))
    }

    pub fn output_dim(&self) -> usize {
        self.output.width
    }
}

/// A dense feed-forward network. Parameters live in a separate [`ParamSet`]
/// ordered `[w0, b0, w1, b1, ...]`, with `w_i` shaped `(fan_in, fan_out)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub prefix: String,
}

/// Materializes the network and its Glorot-uniform initial parameters.
pub fn build_mlp(spec: &MlpSpec, prefix: &str) -> Result<(Mlp, ParamSet), NnError> {
    if spec.input_dim == 0 {
        return Err(NnError::ZeroWidth { layer: 0 });
    }
    if let Some(i) = spec.layers().position(|l| l.width == 0) {
        return Err(NnError::ZeroWidth { layer: i + 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.init_seed);
    let mut params = ParamSet::default();
    let mut fan_in = spec.input_dim;
    for (i, layer) in spec.layers().enumerate() {
        let fan_out = layer.width;
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w: Vec<f64> = (0..fan_in * fan_out)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        params.push(
            format!("{prefix}.{i}.weight"),
            Tensor::from_parts(vec![fan_in, fan_out], w),
        )?;
        params.push(format!("{prefix}.{i}.bias"), Tensor::zeros(&[fan_out]))?;
        fan_in = fan_out;
    }
    Ok((
        Mlp {
            spec: spec.clone(),
            prefix: prefix.to_string(),
        },
        params,
    ))
}

impl Mlp {
    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output.width
    }

    /// Appends the forward pass to `g`. `bound` holds the parameter nodes in
    /// `ParamSet` order.
    pub fn forward(&self, g: &mut ExprGraph, x: NodeId, bound: &[NodeId]) -> Result<NodeId, TensorError> {
        let mut h = x;
        for (i, layer) in self.spec.layers().enumerate() {
            let z = g.matmul(h, bound[2 * i])?;
            let z = g.add(z, bound[2 * i + 1])?;
            h = layer.activation.apply(g, z)?;
        }
        Ok(h)
    }

    /// A standalone template graph over a placeholder input named `x`.
    pub fn template(&self, params: &ParamSet) -> Result<ExprGraph, TensorError> {
        let mut g = ExprGraph::new();
        let x = g.placeholder("x", false);
        let bound = params.bind(&mut g);
        let out = self.forward(&mut g, x, &bound)?;
        g.set_outputs(vec![out]);
        Ok(g)
    }

    /// Evaluates the network on a `(rows, input_dim)` batch.
    pub fn predict(&self, params: &ParamSet, x: &Tensor) -> Result<Tensor, TensorError> {
        let mut g = ExprGraph::new();
        let xi = g.input("x", x.clone());
        let bound = params.bind_frozen(&mut g);
        let out = self.forward(&mut g, xi, &bound)?;
        Ok(g.value(out)?.clone())
    }
}
