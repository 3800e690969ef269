//! Flat-parameter multilayer perceptron with softmax cross-entropy loss.
//!
//! Parameters are packed layer by layer: the (out x in) weight matrix in
//! row-major order, then the bias vector. Gradients come from reverse-mode
//! accumulation through the layer graph.

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    /// `max(0, t)`; subgradient 0 at the kink.
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, t: f64) -> f64 {
        match self {
            Activation::Relu => t.max(0.0),
            Activation::Tanh => t.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    fn derivative_from_output(self, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - out * out,
        }
    }
}

/// Total flattened weight + bias count.
pub fn param_count(layers: &[usize]) -> usize {
    layers
        .windows(2)
        .map(|w| (w[0] + 1) * w[1])
        .sum()
}

/// Forward pass storing every layer's activations. Returns (activations,
/// softmax probabilities).
fn forward(
    layers: &[usize],
    activation: Activation,
    params: ArrayView1<f64>,
    input: &[f64],
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let depth = layers.len() - 1;
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(depth + 1);
    acts.push(input.to_vec());
    let mut offset = 0;
    for (l, w) in layers.windows(2).enumerate() {
        let (n_in, n_out) = (w[0], w[1]);
        let weights = &params.as_slice().unwrap()[offset..offset + n_out * n_in];
        let biases = &params.as_slice().unwrap()[offset + n_out * n_in..offset + n_out * (n_in + 1)];
        offset += n_out * (n_in + 1);
        let prev = &acts[l];
        let mut z = vec![0.0; n_out];
        for (r, zr) in z.iter_mut().enumerate() {
            let mut sum = biases[r];
            let row = &weights[r * n_in..(r + 1) * n_in];
            for (wv, av) in row.iter().zip(prev.iter()) {
                sum += wv * av;
            }
            *zr = sum;
        }
        if l + 1 < depth {
            for v in z.iter_mut() {
                *v = activation.apply(*v);
            }
        }
        acts.push(z);
    }
    let probs = softmax(acts.last().unwrap());
    (acts, probs)
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Cross-entropy loss of one sample.
pub fn sample_loss(
    layers: &[usize],
    activation: Activation,
    params: ArrayView1<f64>,
    data: &Dataset,
    index: usize,
) -> f64 {
    let input: Vec<f64> = data.features().row(index).to_vec();
    let (_, probs) = forward(layers, activation, params, &input);
    let p = probs[data.labels()[index]].max(1e-300);
    -p.ln()
}

/// Predicted class of one sample (argmax of logits).
pub fn predict(
    layers: &[usize],
    activation: Activation,
    params: ArrayView1<f64>,
    data: &Dataset,
    index: usize,
) -> usize {
    let input: Vec<f64> = data.features().row(index).to_vec();
    let (_, probs) = forward(layers, activation, params, &input);
    probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap()
}

/// Add one sample's loss gradient into `grad` (same packing as `params`).
pub fn accumulate_sample_grad(
    layers: &[usize],
    activation: Activation,
    params: ArrayView1<f64>,
    data: &Dataset,
    index: usize,
    grad: &mut ndarray::Array1<f64>,
) {
    let input: Vec<f64> = data.features().row(index).to_vec();
    let (acts, probs) = forward(layers, activation, params, &input);
    let depth = layers.len() - 1;
    let label = data.labels()[index];

    // Softmax cross-entropy: dL/dz_out = p - onehot(label).
    let mut delta: Vec<f64> = probs;
    delta[label] -= 1.0;

    // Walk layers backwards; `offsets[l]` is where layer l's params start.
    let mut offsets = Vec::with_capacity(depth);
    let mut offset = 0;
    for w in layers.windows(2) {
        offsets.push(offset);
        offset += (w[0] + 1) * w[1];
    }

    let params = params.as_slice().unwrap();
    let grad = grad.as_slice_mut().unwrap();
    for l in (0..depth).rev() {
        let (n_in, n_out) = (layers[l], layers[l + 1]);
        let base = offsets[l];
        let prev = &acts[l];
        for r in 0..n_out {
            let d = delta[r];
            let row = base + r * n_in;
            for (c, pv) in prev.iter().enumerate() {
                grad[row + c] += d * pv;
            }
            grad[base + n_out * n_in + r] += d;
        }
        if l > 0 {
            let weights = &params[base..base + n_out * n_in];
            let mut next_delta = vec![0.0; n_in];
            for (c, nd) in next_delta.iter_mut().enumerate() {
                let mut sum = 0.0;
                for (r, d) in delta.iter().enumerate() {
                    sum += weights[r * n_in + c] * d;
                }
                *nd = sum * activation.derivative_from_output(acts[l][c]);
            }
            delta = next_delta;
        }
    }
}
