//! One-dimensional convolution, max pooling, and dropout.
//!
//! The convolutional classifier treats a flow's feature vector as a
//! univariate signal: one channel, length = number of features. Everything
//! here works on that shape.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::mlp::{
    backprop_input, Activation, DenseNetwork, Gradients, Loss, OptimizerState,
};
use crate::rng::{rng_for, Stream};

/// A bank of 1-D filters applied with no padding (valid convolution):
/// `out[f][t] = bias[f] + Σ_j kernel[f][j] · x[t + j]`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Conv1d {
    /// One filter per row, laid out `(filters, kernel_len)`.
    pub kernels: Mat,
    pub biases: Vec<f64>,
}

impl Conv1d {
    /// Seeded Xavier-uniform filters over `fan_in = kernel_len`,
    /// `fan_out = n_filters`; biases start at zero.
    pub fn new(n_filters: usize, kernel_len: usize, seed: u64) -> Result<Conv1d> {
        if n_filters == 0 || kernel_len == 0 {
            return Err(Error::param("conv", "filters and kernel length must be positive"));
        }
        let mut rng = rng_for(seed, Stream::WeightInit);
        let bound = (6.0 / (kernel_len + n_filters) as f64).sqrt();
        let kernels = Mat::from_fn(n_filters, kernel_len, |_, _| {
            (rng.gen::<f64>() * 2.0 - 1.0) * bound
        });
        Ok(Conv1d {
            kernels,
            biases: vec![0.0; n_filters],
        })
    }

    pub fn n_filters(&self) -> usize {
        self.kernels.rows()
    }

    pub fn kernel_len(&self) -> usize {
        self.kernels.cols()
    }

    /// Output positions for an input of length `len`.
    pub fn output_len(&self, len: usize) -> Result<usize> {
        if len < self.kernel_len() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel_len(),
                found: len,
            });
        }
        Ok(len - self.kernel_len() + 1)
    }

    /// Returns the feature maps as `(filters, positions)`.
    pub fn forward(&self, input: &[f64]) -> Result<Mat> {
        let out_len = self.output_len(input.len())?;
        let k = self.kernel_len();
        let mut out = Mat::zeros(self.n_filters(), out_len);
        for f in 0..self.n_filters() {
            let kernel = self.kernels.row(f).to_vec();
            let bias = self.biases[f];
            for t in 0..out_len {
                *out.at_mut(f, t) = bias + crate::linalg::dot(&kernel, &input[t..t + k]);
            }
        }
        Ok(out)
    }
}

/// Non-overlapping max pooling over one feature map. Positions that do not
/// fill a whole window are dropped. Returns the pooled values and, for each
/// window, the input index that won (first index on ties), which the
/// backward pass routes gradients through.
pub fn maxpool1d(map: &[f64], width: usize) -> (Vec<f64>, Vec<usize>) {
    assert!(width > 0, "pool width must be positive");
    let windows = map.len() / width;
    let mut pooled = Vec::with_capacity(windows);
    let mut winners = Vec::with_capacity(windows);
    for w in 0..windows {
        let start = w * width;
        let mut best = start;
        for i in start + 1..start + width {
            if map[i] > map[best] {
                best = i;
            }
        }
        pooled.push(map[best]);
        winners.push(best);
    }
    (pooled, winners)
}

/// Inverted dropout: each value is dropped with probability `rate`;
/// survivors are scaled by `1 / (1 − rate)` so the expected value is
/// unchanged. Returns the keep mask for the backward pass. Inference skips
/// this entirely.
pub fn dropout_apply(values: &mut [f64], rate: f64, rng: &mut impl Rng) -> Vec<bool> {
    debug_assert!((0.0..1.0).contains(&rate));
    let scale = 1.0 / (1.0 - rate);
    values
        .iter_mut()
        .map(|v| {
            if rng.gen::<f64>() < rate {
                *v = 0.0;
                false
            } else {
                *v *= scale;
                true
            }
        })
        .collect()
}

/// Convolutional flow classifier:
/// conv → ReLU → max-pool → dropout → dense head (ReLU, softmax).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CnnModel {
    pub conv: Conv1d,
    pub pool_width: usize,
    pub dropout_rate: f64,
    /// Dense layers over the flattened pooled maps.
    pub head: DenseNetwork,
    /// Input length the head was sized for.
    pub input_len: usize,
}

/// Everything the backward pass needs from a CNN forward pass.
pub struct CnnTrace {
    feature_maps: Mat,
    relu_maps: Mat,
    /// Flattened pooled vector after dropout; input of the head.
    head_input: Vec<f64>,
    winners: Vec<Vec<usize>>,
    keep_mask: Option<Vec<bool>>,
}

impl CnnModel {
    /// Builds the standard shape: `n_filters` filters of `kernel_len` taps,
    /// pooling of `pool_width`, then a dense layer of `dense_units` and a
    /// softmax over `n_classes`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        input_len: usize,
        n_filters: usize,
        kernel_len: usize,
        pool_width: usize,
        dropout_rate: f64,
        dense_units: usize,
        n_classes: usize,
        seed: u64,
    ) -> Result<CnnModel> {
        if pool_width == 0 {
            return Err(Error::param("pool_width", "must be positive"));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::param(
                "dropout_rate",
                format!("must lie in [0, 1), got {dropout_rate}"),
            ));
        }
        let conv = Conv1d::new(n_filters, kernel_len, seed)?;
        let conv_len = conv.output_len(input_len)?;
        let flat = n_filters * (conv_len / pool_width);
        if flat == 0 {
            return Err(Error::param(
                "pool_width",
                format!("pooling {conv_len} positions by {pool_width} leaves nothing"),
            ));
        }
        let head = DenseNetwork::new(
            &[flat, dense_units, n_classes],
            Activation::Relu,
            Activation::Softmax,
            // Offset so head weights are not correlated with the filters.
            seed ^ 0x636e_6e68,
        )?;
        Ok(CnnModel {
            conv,
            pool_width,
            dropout_rate,
            head,
            input_len,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.head.output_dim()
    }

    pub fn weight_count(&self) -> usize {
        self.conv.kernels.len() + self.conv.biases.len() + self.head.weight_count()
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_len {
            return Err(Error::DimensionMismatch {
                expected: self.input_len,
                found: input.len(),
            });
        }
        Ok(())
    }

    /// Forward pass up to the head input. Dropout only happens when an RNG
    /// is supplied (training); inference leaves the activations alone.
    fn trace(&self, input: &[f64], dropout_rng: Option<&mut rand_chacha::ChaCha8Rng>) -> Result<CnnTrace> {
        self.check_input(input)?;
        let feature_maps = self.conv.forward(input)?;
        let relu_maps = Mat::from_fn(feature_maps.rows(), feature_maps.cols(), |r, c| {
            feature_maps.at(r, c).max(0.0)
        });

        let mut head_input = Vec::new();
        let mut winners = Vec::with_capacity(relu_maps.rows());
        for f in 0..relu_maps.rows() {
            let (pooled, won) = maxpool1d(relu_maps.row(f), self.pool_width);
            head_input.extend(pooled);
            winners.push(won);
        }

        let keep_mask = match dropout_rng {
            Some(rng) if self.dropout_rate > 0.0 => {
                Some(dropout_apply(&mut head_input, self.dropout_rate, rng))
            }
            _ => None,
        };
        Ok(CnnTrace {
            feature_maps,
            relu_maps,
            head_input,
            winners,
            keep_mask,
        })
    }

    /// Class probabilities without dropout.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let trace = self.trace(input, None)?;
        self.head.forward(&trace.head_input)
    }

    pub fn predict_class(&self, input: &[f64]) -> Result<usize> {
        Ok(crate::linalg::argmax(&self.forward(input)?))
    }

    /// One training sample: forward with dropout, backward through the
    /// head, dropout, pooling, ReLU, and the filters. Gradients accumulate
    /// into `grads`; the sample loss is returned.
    pub fn backprop(
        &self,
        input: &[f64],
        target: &[f64],
        loss: Loss,
        dropout_rng: &mut rand_chacha::ChaCha8Rng,
        grads: &mut CnnGradients,
    ) -> Result<f64> {
        let trace = self.trace(input, Some(dropout_rng))?;
        let (loss_value, flat_grad) =
            backprop_input(&self.head, &trace.head_input, target, loss, &mut grads.head)?;

        // Dropout backward: dropped units pass nothing; kept units carry
        // the same 1/(1−rate) scale as the forward pass.
        let mut flat_grad = flat_grad;
        if let Some(mask) = &trace.keep_mask {
            let scale = 1.0 / (1.0 - self.dropout_rate);
            for (g, &keep) in flat_grad.iter_mut().zip(mask) {
                *g = if keep { *g * scale } else { 0.0 };
            }
        }

        // Un-pool: each pooled gradient flows to the winning position, then
        // through the ReLU kink.
        let per_filter = trace.winners[0].len();
        let k = self.conv.kernel_len();
        for f in 0..self.conv.n_filters() {
            let mut delta_map = vec![0.0; trace.relu_maps.cols()];
            for (w, &winner) in trace.winners[f].iter().enumerate() {
                delta_map[winner] = flat_grad[f * per_filter + w];
            }
            for (t, d) in delta_map.iter_mut().enumerate() {
                if trace.feature_maps.at(f, t) <= 0.0 {
                    *d = 0.0;
                }
            }
            // dL/dkernel[f][j] = Σ_t delta[t] · x[t + j]
            for (t, &d) in delta_map.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &mut grads.kernels.as_mut_slice()[f * k..(f + 1) * k];
                for (j, g) in row.iter_mut().enumerate() {
                    *g += d * input[t + j];
                }
                grads.biases[f] += d;
            }
        }
        Ok(loss_value)
    }

    /// Parameter block lengths, for [`OptimizerState::for_blocks`].
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.conv.kernels.len(), self.conv.biases.len()];
        sizes.extend(
            self.head
                .layers
                .iter()
                .flat_map(|l| [l.weights.len(), l.biases.len()]),
        );
        sizes
    }

    /// Applies one optimizer step over all parameter blocks.
    pub fn apply_step(
        &mut self,
        grads: &CnnGradients,
        state: &mut OptimizerState,
        optimizer: &crate::mlp::Optimizer,
        lr: f64,
    ) {
        state.begin_step();
        state.update_block(0, self.conv.kernels.as_mut_slice(), grads.kernels.as_slice(), optimizer, lr);
        state.update_block(1, &mut self.conv.biases, &grads.biases, optimizer, lr);
        for (l, layer) in self.head.layers.iter_mut().enumerate() {
            state.update_block(
                2 + 2 * l,
                layer.weights.as_mut_slice(),
                grads.head.weights[l].as_slice(),
                optimizer,
                lr,
            );
            state.update_block(
                3 + 2 * l,
                layer.biases.as_mut_slice(),
                &grads.head.biases[l],
                optimizer,
                lr,
            );
        }
    }
}

/// Gradient buffers shaped like a [`CnnModel`].
pub struct CnnGradients {
    pub kernels: Mat,
    pub biases: Vec<f64>,
    pub head: Gradients,
}

impl CnnGradients {
    pub fn zeros_like(model: &CnnModel) -> CnnGradients {
        CnnGradients {
            kernels: Mat::zeros(model.conv.kernels.rows(), model.conv.kernels.cols()),
            biases: vec![0.0; model.conv.biases.len()],
            head: Gradients::zeros_like(&model.head),
        }
    }

    pub fn reset(&mut self) {
        self.kernels.as_mut_slice().fill(0.0);
        self.biases.fill(0.0);
        self.head.reset();
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.kernels.as_mut_slice() {
            *v *= s;
        }
        for v in &mut self.biases {
            *v *= s;
        }
        self.head.scale(s);
    }
}
