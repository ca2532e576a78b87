//! Shared finite-difference oracle for gradient checks.
//!
//! Backpropagation is verified against an oracle that knows nothing about
//! the chain rule: perturb one parameter, re-run the forward pass, and
//! difference the loss. Smooth activations only; ReLU's kink breaks the
//! difference quotient.

use nnids_core::deep::{CnnGradients, CnnModel, RecurrentGradients, RecurrentModel};
use nnids_core::mlp::{backprop, Activation, DenseNetwork, Gradients, Loss};
use nnids_core::rng::{rng_for, Stream};

const FD_STEP: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Mean loss over the batch, matching how training averages gradients.
fn batch_loss(net: &DenseNetwork, batch: &[(Vec<f64>, Vec<f64>)], loss: Loss) -> f64 {
    let mut scratch = Gradients::zeros_like(net);
    let total: f64 = batch
        .iter()
        .map(|(x, t)| backprop(net, x, t, loss, &mut scratch).unwrap())
        .sum();
    total / batch.len() as f64
}

fn batch_gradients(net: &DenseNetwork, batch: &[(Vec<f64>, Vec<f64>)], loss: Loss) -> Gradients {
    let mut grads = Gradients::zeros_like(net);
    for (x, t) in batch {
        backprop(net, x, t, loss, &mut grads).unwrap();
    }
    grads.scale(1.0 / batch.len() as f64);
    grads
}

/// Checks every weight and bias of `net` against central differences.
pub fn check_network(mut net: DenseNetwork, batch: &[(Vec<f64>, Vec<f64>)], loss: Loss) {
    let analytic = batch_gradients(&net, batch, loss);
    let mut worst = 0.0f64;
    for l in 0..net.layers.len() {
        let n_weights = net.layers[l].weights.len();
        let n_biases = net.layers[l].biases.len();
        for i in 0..n_weights + n_biases {
            let original = {
                let p = param_mut(&mut net, l, i);
                let v = *p;
                *p = v + FD_STEP;
                v
            };
            let up = batch_loss(&net, batch, loss);
            *param_mut(&mut net, l, i) = original - FD_STEP;
            let down = batch_loss(&net, batch, loss);
            *param_mut(&mut net, l, i) = original;

            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = if i < n_weights {
                analytic.weights[l].as_slice()[i]
            } else {
                analytic.biases[l][i - n_weights]
            };
            worst = worst.max(relative_error(a, numeric));
        }
    }
    assert!(
        worst <= TOLERANCE,
        "worst relative gradient error {worst:.2e} exceeds {TOLERANCE:.0e}"
    );
}

fn param_mut(net: &mut DenseNetwork, layer: usize, index: usize) -> &mut f64 {
    let n_weights = net.layers[layer].weights.len();
    if index < n_weights {
        &mut net.layers[layer].weights.as_mut_slice()[index]
    } else {
        &mut net.layers[layer].biases[index - n_weights]
    }
}

pub fn fixture_batch(in_dim: usize, out_dim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    // Deterministic, irregular values; targets are one-hot.
    (0..6)
        .map(|s| {
            let x: Vec<f64> = (0..in_dim)
                .map(|i| ((s * 7 + i * 3) as f64 * 0.37).sin())
                .collect();
            let mut t = vec![0.0; out_dim];
            t[s % out_dim] = 1.0;
            (x, t)
        })
        .collect()
}

// Deep models: parameters are copied in and out through a flat vector, so
// the oracle needs no knowledge of the model's internal layout.

fn dense_params(net: &DenseNetwork, out: &mut Vec<f64>) {
    for l in &net.layers {
        out.extend_from_slice(l.weights.as_slice());
        out.extend_from_slice(&l.biases);
    }
}

fn dense_grads(grads: &Gradients, out: &mut Vec<f64>) {
    for (w, b) in grads.weights.iter().zip(&grads.biases) {
        out.extend_from_slice(w.as_slice());
        out.extend_from_slice(b);
    }
}

fn set_dense_params(net: &mut DenseNetwork, flat: &[f64], pos: &mut usize) {
    for l in &mut net.layers {
        for slot in l.weights.as_mut_slice().iter_mut().chain(l.biases.iter_mut()) {
            *slot = flat[*pos];
            *pos += 1;
        }
    }
}

pub trait FlatParams {
    fn get_params(&self) -> Vec<f64>;
    fn set_params(&mut self, flat: &[f64]);
    /// (mean batch loss, flat gradient) over the batch.
    fn loss_and_grad(&self, batch: &[(Vec<f64>, Vec<f64>)]) -> (f64, Vec<f64>);
}

impl FlatParams for RecurrentModel {
    fn get_params(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for block in self.cell.blocks() {
            flat.extend_from_slice(block);
        }
        dense_params(&self.head, &mut flat);
        flat
    }

    fn set_params(&mut self, flat: &[f64]) {
        let mut pos = 0;
        for block in self.cell.blocks_mut() {
            for slot in block.iter_mut() {
                *slot = flat[pos];
                pos += 1;
            }
        }
        set_dense_params(&mut self.head, flat, &mut pos);
        assert_eq!(pos, flat.len());
    }

    fn loss_and_grad(&self, batch: &[(Vec<f64>, Vec<f64>)]) -> (f64, Vec<f64>) {
        let mut grads = RecurrentGradients::zeros_like(self);
        let mut total = 0.0;
        for (x, t) in batch {
            // Three steps per sample exercises the recurrence, not just
            // the input projection.
            let steps: Vec<&[f64]> = x.chunks(x.len() / 3).collect();
            total += self
                .backprop(&steps, t, Loss::SquaredError, &mut grads)
                .unwrap();
        }
        grads.scale(1.0 / batch.len() as f64);
        let mut flat = Vec::new();
        for block in grads.cell.blocks() {
            flat.extend_from_slice(block);
        }
        dense_grads(&grads.head, &mut flat);
        (total / batch.len() as f64, flat)
    }
}

impl FlatParams for CnnModel {
    fn get_params(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        flat.extend_from_slice(self.conv.kernels.as_slice());
        flat.extend_from_slice(&self.conv.biases);
        dense_params(&self.head, &mut flat);
        flat
    }

    fn set_params(&mut self, flat: &[f64]) {
        let mut pos = 0;
        for slot in self
            .conv
            .kernels
            .as_mut_slice()
            .iter_mut()
            .chain(self.conv.biases.iter_mut())
        {
            *slot = flat[pos];
            pos += 1;
        }
        set_dense_params(&mut self.head, flat, &mut pos);
        assert_eq!(pos, flat.len());
    }

    fn loss_and_grad(&self, batch: &[(Vec<f64>, Vec<f64>)]) -> (f64, Vec<f64>) {
        let mut grads = CnnGradients::zeros_like(self);
        let mut rng = rng_for(0, Stream::Dropout); // rate 0: never consulted
        let mut total = 0.0;
        for (x, t) in batch {
            total += self
                .backprop(x, t, Loss::SquaredError, &mut rng, &mut grads)
                .unwrap();
        }
        grads.scale(1.0 / batch.len() as f64);
        let mut flat = Vec::new();
        flat.extend_from_slice(grads.kernels.as_slice());
        flat.extend_from_slice(&grads.biases);
        dense_grads(&grads.head, &mut flat);
        (total / batch.len() as f64, flat)
    }
}

pub fn check_flat_model<M: FlatParams>(model: &mut M, batch: &[(Vec<f64>, Vec<f64>)]) {
    let (_, analytic) = model.loss_and_grad(batch);
    let base = model.get_params();
    assert_eq!(analytic.len(), base.len());

    let mut worst = 0.0f64;
    let mut perturbed = base.clone();
    for p in 0..base.len() {
        perturbed[p] = base[p] + FD_STEP;
        model.set_params(&perturbed);
        let (up, _) = model.loss_and_grad(batch);
        perturbed[p] = base[p] - FD_STEP;
        model.set_params(&perturbed);
        let (down, _) = model.loss_and_grad(batch);
        perturbed[p] = base[p];

        let numeric = (up - down) / (2.0 * FD_STEP);
        worst = worst.max(relative_error(analytic[p], numeric));
    }
    model.set_params(&base);
    assert!(
        worst <= TOLERANCE,
        "worst relative gradient error {worst:.2e} exceeds {TOLERANCE:.0e}"
    );
}

/// Batch whose inputs split evenly into 3 recurrent steps.
pub fn sequence_batch(step_dim: usize, out_dim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    fixture_batch(step_dim * 3, out_dim)
}

pub fn smooth_head(net: &mut DenseNetwork) {
    // ReLU's kink breaks central differences; tanh keeps the check exact.
    for l in 0..net.layers.len() - 1 {
        net.layers[l].activation = Activation::Tanh;
    }
}
