//! Minimal dense feed-forward networks with reverse-mode gradients.
//!
//! Networks are plain structs of row-major weight matrices; there is no graph
//! machinery. `forward_cached` records the per-layer activations that
//! `backward` consumes, and optimizer state lives outside the net so the same
//! parameters can be trained, frozen, or snapshotted freely.

mod adam;
mod adapter;
mod loss;

pub use adam::{AdamConfig, AdamState};
pub use adapter::{AdapterGrads, AdapterParams, AdapterTrace};
pub use loss::{cross_entropy_loss_grad, masked_mse_loss_grad, softmax_rows};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{add_row_vec, col_sums, matmul, matmul_a_bt, matmul_at_b, Mat};
use crate::seeds::{self, Domain};

/// Per-layer activation. Softmax is never a layer activation here; it is
/// fused into the cross-entropy loss for stability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the *output* value, valid for both
    /// variants here.
    #[inline]
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// One affine transform plus activation. Weights are `[in_dim x out_dim]` so
/// a batch forward is `X W + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub w: Mat,
    pub b: Vec<f64>,
    pub act: Activation,
}

impl DenseLayer {
    pub fn in_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.w.cols()
    }
}

/// A stack of dense layers with chain-compatible dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    layers: Vec<DenseLayer>,
    seed: u64,
}

/// Per-layer post-activation values recorded during `forward_cached`.
pub struct ForwardTrace {
    input: Mat,
    outputs: Vec<Mat>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Mat {
        self.outputs.last().expect("trace of empty net")
    }
}

/// Gradient buffers shaped like a [`DenseNet`].
#[derive(Debug, Clone)]
pub struct NetGrads {
    pub dw: Vec<Mat>,
    pub db: Vec<Vec<f64>>,
}

impl NetGrads {
    pub fn zeros_like(net: &DenseNet) -> Self {
        NetGrads {
            dw: net
                .layers
                .iter()
                .map(|l| Mat::zeros(l.w.rows(), l.w.cols()))
                .collect(),
            db: net.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }
}

/// Scaled-uniform fan-in initialization: `U(-sqrt(6/fan_in), +sqrt(6/fan_in))`.
fn init_weight<R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize) -> Mat {
    let limit = (6.0 / fan_in as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.gen_range(-limit..limit))
        .collect();
    Mat::from_vec(fan_in, fan_out, data)
}

impl DenseNet {
    /// Builds a net with the given layer widths. `dims` has one more entry
    /// than there are layers; all hidden layers use ReLU and the final layer
    /// is linear (logits / reconstruction).
    pub fn new(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::config("a net needs at least one layer"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::config("layer widths must be positive"));
        }
        let mut rng = seeds::rng(seed, Domain::EncoderInit, 0);
        let n_layers = dims.len() - 1;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, d)| DenseLayer {
                w: init_weight(&mut rng, d[0], d[1]),
                b: vec![0.0; d[1]],
                act: if i + 1 < n_layers {
                    Activation::Relu
                } else {
                    Activation::Identity
                },
            })
            .collect();
        Ok(DenseNet { layers, seed })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.w.data().len() + l.b.len())
            .sum()
    }

    /// Flat parameter tensor lengths, in the fixed order `[w0, b0, w1, b1, ..]`.
    pub fn param_lens(&self) -> Vec<usize> {
        self.layers
            .iter()
            .flat_map(|l| [l.w.data().len(), l.b.len()])
            .collect()
    }

    /// Mutable views over all parameter tensors, matching `param_lens` order.
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.w.data_mut(), l.b.as_mut_slice()])
            .collect()
    }

    pub fn param_slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.w.data(), l.b.as_slice()])
            .collect()
    }

    fn check_input(&self, batch: &Mat) -> Result<()> {
        if batch.cols() != self.in_dim() {
            return Err(Error::config(format!(
                "input width {} does not match net input dim {}",
                batch.cols(),
                self.in_dim()
            )));
        }
        Ok(())
    }

    /// Batch forward pass; does not mutate parameters.
    pub fn forward(&self, batch: &Mat) -> Result<Mat> {
        self.check_input(batch)?;
        let mut cur = batch.clone();
        for layer in &self.layers {
            cur = layer_forward(layer, &cur);
        }
        Ok(cur)
    }

    /// Forward pass that records post-activation values for `backward`.
    pub fn forward_cached(&self, batch: &Mat) -> Result<ForwardTrace> {
        self.check_input(batch)?;
        let mut outputs = Vec::with_capacity(self.layers.len());
        let mut cur = batch.clone();
        for layer in &self.layers {
            cur = layer_forward(layer, &cur);
            outputs.push(cur.clone());
        }
        Ok(ForwardTrace {
            input: batch.clone(),
            outputs,
        })
    }

    /// Backpropagates `d_out` through the recorded trace, accumulating into
    /// `grads`, and returns the gradient at the net input.
    pub fn backward(&self, trace: &ForwardTrace, d_out: &Mat, grads: &mut NetGrads) -> Mat {
        let mut d_cur = d_out.clone();
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let out = &trace.outputs[li];
            // d pre-activation
            let mut dz = d_cur;
            for r in 0..dz.rows() {
                let out_row = out.row(r);
                for (c, g) in dz.row_mut(r).iter_mut().enumerate() {
                    *g *= layer.act.grad_from_output(out_row[c]);
                }
            }
            let input = if li == 0 {
                &trace.input
            } else {
                &trace.outputs[li - 1]
            };
            let dw = matmul_at_b(input, &dz);
            let db = col_sums(&dz);
            for (g, x) in grads.dw[li].data_mut().iter_mut().zip(dw.data()) {
                *g += x;
            }
            for (g, x) in grads.db[li].iter_mut().zip(&db) {
                *g += x;
            }
            d_cur = matmul_a_bt(&dz, &layer.w);
        }
        d_cur
    }
}

#[inline]
fn layer_forward(layer: &DenseLayer, input: &Mat) -> Mat {
    let mut z = matmul(input, &layer.w);
    add_row_vec(&mut z, &layer.b);
    if layer.act == Activation::Relu {
        for v in z.data_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    z
}

/// SHA-256 over the little-endian bytes of all parameters, as hex. Used for
/// freeze contracts and protocol-fairness checks.
pub fn param_hash(slices: &[&[f64]]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for s in slices {
        for v in *s {
            h.update(v.to_le_bytes());
        }
    }
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
