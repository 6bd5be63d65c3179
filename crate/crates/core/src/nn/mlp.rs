//! Linear layers, LeakyReLU, and a multi-layer perceptron with exact backprop.
//!
//! There are two ways to run an [`Mlp`]:
//!
//! - [`Mlp::forward`] / [`Mlp::backward`] keep a cache inside the network, so
//!   a backward call must follow a forward call on the same batch.
//! - [`Mlp::forward_traced`] / [`Mlp::backward_traced`] hand the cache back to
//!   the caller as a [`Trace`]. The multimodal losses push several inputs
//!   through the same sub-network, so they use this form and sum the
//!   resulting [`MlpGrads`].

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Default LeakyReLU negative slope.
pub const LEAKY_SLOPE: f64 = 0.01;

#[inline]
pub fn leaky_relu(z: f64, slope: f64) -> f64 {
    if z >= 0.0 {
        z
    } else {
        slope * z
    }
}

#[inline]
fn leaky_relu_grad(z: f64, slope: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        slope
    }
}

/// A fully connected layer computing `input · weightᵀ + bias`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    /// `out × in`
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(input: usize, output: usize) -> Self {
        Linear {
            weight: Matrix::zeros(output, input),
            bias: vec![0.0; output],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn param_count(&self) -> usize {
        self.weight.rows() * self.weight.cols() + self.bias.len()
    }

    /// Pre-activation output for a batch.
    pub fn forward(&self, input: &Matrix) -> Result<Matrix> {
        if input.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "layer expects {} inputs, got {}",
                self.input_dim(),
                input.cols()
            )));
        }
        let mut out = Matrix::gemm(input, false, &self.weight, true)?;
        for r in 0..out.rows() {
            for (v, b) in out.row_mut(r).iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(out)
    }
}

/// Activations recorded during a forward pass.
#[derive(Clone, Debug)]
pub struct Trace {
    /// Input to each layer.
    inputs: Vec<Matrix>,
    /// Pre-activation output of each layer.
    pre: Vec<Matrix>,
}

impl Trace {
    /// Pre-activation outputs, one per layer.
    pub fn pre_activations(&self) -> &[Matrix] {
        &self.pre
    }
}

/// Gradients for every layer of an [`Mlp`], plus the gradient with respect
/// to the network input.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    pub input: Matrix,
}

impl MlpGrads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        MlpGrads {
            weights: mlp
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.weight.rows(), l.weight.cols()))
                .collect(),
            biases: mlp.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
            input: Matrix::zeros(0, 0),
        }
    }

    /// Adds parameter gradients of `other` into `self`. Input gradients are
    /// not accumulated.
    pub fn accumulate(&mut self, other: &MlpGrads) -> Result<()> {
        if self.weights.len() != other.weights.len() {
            return Err(Error::Shape("accumulating grads of different networks".into()));
        }
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            a.add_assign(b)?;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        Ok(())
    }

    /// Flat gradient slices in the same order as [`Mlp::params_mut`].
    pub fn flat(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.weights.len() * 2);
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.push(w.as_slice());
            out.push(b.as_slice());
        }
        out
    }
}

/// A stack of linear layers with LeakyReLU between them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Linear>,
    pub slope: f64,
    /// Apply the activation after the final layer as well.
    pub activate_last: bool,
    #[serde(skip)]
    cache: Option<Trace>,
}

impl PartialEq for Mlp {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
            && self.slope == other.slope
            && self.activate_last == other.activate_last
    }
}

impl Mlp {
    pub fn new(layers: Vec<Linear>, slope: f64, activate_last: bool) -> Result<Self> {
        if !(slope > 0.0 && slope < 1.0) {
            return Err(Error::Config(format!("LeakyReLU slope {slope} not in (0, 1)")));
        }
        for pair in layers.windows(2) {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::Shape(format!(
                    "layer dims do not chain: {} -> {}",
                    pair[0].output_dim(),
                    pair[1].input_dim()
                )));
            }
        }
        for l in &layers {
            if l.bias.len() != l.weight.rows() {
                return Err(Error::Shape("bias length differs from weight rows".into()));
            }
        }
        Ok(Mlp {
            layers,
            slope,
            activate_last,
            cache: None,
        })
    }

    /// Zero-initialised network through the given widths, e.g. `[in, h, out]`.
    pub fn with_dims(dims: &[usize], activate_last: bool) -> Self {
        let layers = dims.windows(2).map(|w| Linear::zeros(w[0], w[1])).collect();
        Mlp {
            layers,
            slope: LEAKY_SLOPE,
            activate_last,
            cache: None,
        }
    }

    pub fn empty() -> Self {
        Mlp::with_dims(&[], false)
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, Linear::input_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, Linear::output_dim)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Linear::param_count).sum()
    }

    fn activated(&self, layer: usize) -> bool {
        layer + 1 < self.layers.len() || self.activate_last
    }

    /// Forward pass returning the output and the recorded activations.
    pub fn forward_traced(&self, input: &Matrix) -> Result<(Matrix, Trace)> {
        if self.layers.is_empty() {
            return Err(Error::State("forward through an empty network".into()));
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut current = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&current)?;
            let a = if self.activated(i) {
                z.map(|v| leaky_relu(v, self.slope))
            } else {
                z.clone()
            };
            inputs.push(current);
            pre.push(z);
            current = a;
        }
        Ok((current, Trace { inputs, pre }))
    }

    /// Forward pass without recording anything.
    pub fn infer(&self, input: &Matrix) -> Result<Matrix> {
        if self.layers.is_empty() {
            return Err(Error::State("forward through an empty network".into()));
        }
        let mut current = self.layers[0].forward(input)?;
        if self.activated(0) {
            current = current.map(|v| leaky_relu(v, self.slope));
        }
        for (i, layer) in self.layers.iter().enumerate().skip(1) {
            current = layer.forward(&current)?;
            if self.activated(i) {
                current = current.map(|v| leaky_relu(v, self.slope));
            }
        }
        Ok(current)
    }

    /// Backward pass given the gradient of a scalar loss with respect to the
    /// network output.
    pub fn backward_traced(&self, trace: &Trace, upstream: &Matrix) -> Result<MlpGrads> {
        let n = self.layers.len();
        if trace.pre.len() != n {
            return Err(Error::State("trace does not belong to this network".into()));
        }
        let last = &trace.pre[n - 1];
        if upstream.shape() != last.shape() {
            return Err(Error::Shape(format!(
                "upstream gradient {:?} vs output {:?}",
                upstream.shape(),
                last.shape()
            )));
        }
        let mut weights = vec![Matrix::zeros(0, 0); n];
        let mut biases = vec![Vec::new(); n];
        let mut grad = upstream.clone();
        for i in (0..n).rev() {
            if self.activated(i) {
                let z = trace.pre[i].as_slice();
                for (g, &zv) in grad.as_mut_slice().iter_mut().zip(z) {
                    *g *= leaky_relu_grad(zv, self.slope);
                }
            }
            weights[i] = Matrix::gemm(&grad, true, &trace.inputs[i], false)?;
            biases[i] = grad.column_sums();
            grad = Matrix::gemm(&grad, false, &self.layers[i].weight, false)?;
        }
        Ok(MlpGrads {
            weights,
            biases,
            input: grad,
        })
    }

    /// Forward pass that caches activations for a following [`Mlp::backward`].
    pub fn forward(&mut self, input: &Matrix) -> Result<Matrix> {
        let (out, trace) = self.forward_traced(input)?;
        self.cache = Some(trace);
        Ok(out)
    }

    /// Backward pass through the batch seen by the last [`Mlp::forward`].
    pub fn backward(&self, upstream: &Matrix) -> Result<MlpGrads> {
        let trace = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::State("backward called before forward".into()))?;
        self.backward_traced(trace, upstream)
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }

    /// Mutable parameter slices: weight then bias, per layer.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &mut self.layers {
            out.push(l.weight.as_mut_slice());
            out.push(l.bias.as_mut_slice());
        }
        out
    }

    /// Named parameter slices in the same order as [`Mlp::params_mut`].
    pub fn named_params(&self, prefix: &str) -> Vec<(String, &[f64], Vec<usize>)> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for (i, l) in self.layers.iter().enumerate() {
            out.push((
                format!("{prefix}.{i}.weight"),
                l.weight.as_slice(),
                vec![l.weight.rows(), l.weight.cols()],
            ));
            out.push((format!("{prefix}.{i}.bias"), l.bias.as_slice(), vec![l.bias.len()]));
        }
        out
    }
}
