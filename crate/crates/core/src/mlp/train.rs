//! Backpropagation training for dense networks.
//!
//! Gradients are averaged over each mini-batch and applied by either
//! momentum gradient descent or Adam. The per-epoch error history always
//! reports mean squared error over the full training set, regardless of
//! which loss drives the gradients, so curves stay comparable.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::mlp::{Activation, DenseNetwork};
use crate::rng::{rng_for, Stream};

/// Loss reported against an epoch before training is declared divergent.
const DIVERGENCE_CEILING: f64 = 1e6;

/// Training objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    /// Sum of squared output errors per pattern.
    SquaredError,
    /// Categorical cross-entropy; requires a softmax output layer.
    CrossEntropy,
}

/// Weight update rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Optimizer {
    /// Gradient descent with momentum: `v ← momentum·v − lr·g; w ← w + v`.
    Sgd { momentum: f64 },
    /// Adam with bias-corrected moment estimates.
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn adam() -> Optimizer {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Optimizer::Sgd { momentum } => {
                if !(0.0..1.0).contains(&momentum) {
                    return Err(Error::param(
                        "momentum",
                        format!("must lie in [0, 1), got {momentum}"),
                    ));
                }
            }
            Optimizer::Adam { beta1, beta2, epsilon } => {
                for (name, beta) in [("beta1", beta1), ("beta2", beta2)] {
                    if !(0.0..1.0).contains(&beta) {
                        return Err(Error::param(name, format!("must lie in [0, 1), got {beta}")));
                    }
                }
                if !(epsilon > 0.0) {
                    return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
                }
            }
        }
        Ok(())
    }
}

/// Hyperparameters for [`train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub loss: Loss,
    pub seed: u64,
    /// Reshuffle the sample order each epoch (seeded). Off, samples are
    /// visited in dataset order, which makes hand-traced tests possible.
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 100,
            learning_rate: 0.001,
            optimizer: Optimizer::adam(),
            loss: Loss::SquaredError,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::param("epochs", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param(
                "learning_rate",
                format!("must be positive and finite, got {}", self.learning_rate),
            ));
        }
        self.optimizer.validate()
    }
}

/// Per-parameter gradients with the same shapes as a network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Mat>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNetwork) -> Gradients {
        Gradients {
            weights: net
                .layers
                .iter()
                .map(|l| Mat::zeros(l.weights.rows(), l.weights.cols()))
                .collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn reset(&mut self) {
        for w in &mut self.weights {
            w.as_mut_slice().fill(0.0);
        }
        for b in &mut self.biases {
            b.fill(0.0);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for v in w.as_mut_slice() {
                *v *= s;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= s;
            }
        }
    }
}

/// Squared-error of one output vector against its target: `Σ (t_j − s_j)²`.
pub fn squared_error(output: &[f64], target: &[f64]) -> f64 {
    debug_assert_eq!(output.len(), target.len());
    output
        .iter()
        .zip(target)
        .map(|(s, t)| {
            let d = t - s;
            d * d
        })
        .sum()
}

/// Mean squared error of a network over a sample set.
pub fn mean_squared_error(
    net: &DenseNetwork,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> Result<f64> {
    if inputs.is_empty() {
        return Err(Error::empty("mean squared error over no samples"));
    }
    let mut total = 0.0;
    for (x, t) in inputs.iter().zip(targets) {
        total += squared_error(&net.forward(x)?, t);
    }
    Ok(total / inputs.len() as f64)
}

/// Runs one forward/backward pass and accumulates parameter gradients into
/// `grads`. Returns the per-sample loss value.
pub fn backprop(
    net: &DenseNetwork,
    input: &[f64],
    target: &[f64],
    loss: Loss,
    grads: &mut Gradients,
) -> Result<f64> {
    backprop_impl(net, input, target, loss, grads, false).map(|(value, _)| value)
}

/// Like [`backprop`], but also returns dL/dinput, which lets another layer
/// (a convolution or recurrent cell feeding this network) continue the
/// chain rule below it.
pub fn backprop_input(
    net: &DenseNetwork,
    input: &[f64],
    target: &[f64],
    loss: Loss,
    grads: &mut Gradients,
) -> Result<(f64, Vec<f64>)> {
    backprop_impl(net, input, target, loss, grads, true)
        .map(|(value, input_grad)| (value, input_grad.expect("requested input gradient")))
}

fn backprop_impl(
    net: &DenseNetwork,
    input: &[f64],
    target: &[f64],
    loss: Loss,
    grads: &mut Gradients,
    want_input_grad: bool,
) -> Result<(f64, Option<Vec<f64>>)> {
    if target.len() != net.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.output_dim(),
            found: target.len(),
        });
    }
    let trace = net.forward_trace(input)?;
    let output = trace.post.last().expect("networks have layers");

    let (loss_value, mut upstream): (f64, Vec<f64>) = match loss {
        Loss::SquaredError => {
            let value = squared_error(output, target);
            let grad = output.iter().zip(target).map(|(s, t)| 2.0 * (s - t)).collect();
            (value, grad)
        }
        Loss::CrossEntropy => {
            let value = -output
                .iter()
                .zip(target)
                .map(|(s, t)| t * s.max(1e-12).ln())
                .sum::<f64>();
            // dL/ds for each coordinate; the softmax Jacobian below turns
            // this into the familiar (s − t) in pre-activation space.
            let grad = output
                .iter()
                .zip(target)
                .map(|(s, t)| -t / s.max(1e-12))
                .collect();
            (value, grad)
        }
    };

    let mut input_grad = None;
    for l in (0..net.layers.len()).rev() {
        let layer = &net.layers[l];
        let delta = layer
            .activation
            .backward(&trace.pre[l], &trace.post[l], &upstream);
        let below: &[f64] = if l == 0 { input } else { &trace.post[l - 1] };
        grads.weights[l].add_outer(&delta, below, 1.0);
        for (g, d) in grads.biases[l].iter_mut().zip(&delta) {
            *g += d;
        }
        if l > 0 {
            upstream = layer.weights.matvec_transposed(&delta);
        } else if want_input_grad {
            input_grad = Some(layer.weights.matvec_transposed(&delta));
        }
    }
    Ok((loss_value, input_grad))
}

/// Momentum update on one parameter block:
/// `v ← momentum·v − lr·g`, then `p ← p + v`.
pub fn momentum_step(
    params: &mut [f64],
    grads: &[f64],
    velocity: &mut [f64],
    lr: f64,
    momentum: f64,
) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), velocity.len());
    for ((p, &g), v) in params.iter_mut().zip(grads).zip(velocity) {
        *v = momentum * *v - lr * g;
        *p += *v;
    }
}

/// Adam update on one parameter block. `step` counts updates starting at 1
/// and drives the bias correction.
#[allow(clippy::too_many_arguments)]
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    step: usize,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert!(step >= 1);
    let bc1 = 1.0 - beta1.powi(step as i32);
    let bc2 = 1.0 - beta2.powi(step as i32);
    for (((p, &g), mi), vi) in params.iter_mut().zip(grads).zip(m.iter_mut()).zip(v.iter_mut()) {
        *mi = beta1 * *mi + (1.0 - beta1) * g;
        *vi = beta2 * *vi + (1.0 - beta2) * g * g;
        let m_hat = *mi / bc1;
        let v_hat = *vi / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
}

/// Optimizer scratch space: one or two moment buffers per parameter block
/// (weights and biases of each layer), plus the Adam step counter.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    steps: usize,
}

impl OptimizerState {
    /// State for an arbitrary sequence of parameter blocks; models that are
    /// not plain dense networks list their block lengths here.
    pub fn for_blocks(sizes: impl IntoIterator<Item = usize>) -> OptimizerState {
        let first: Vec<Vec<f64>> = sizes.into_iter().map(|n| vec![0.0; n]).collect();
        OptimizerState {
            second: first.clone(),
            first,
            steps: 0,
        }
    }

    pub fn new(net: &DenseNetwork) -> OptimizerState {
        OptimizerState::for_blocks(
            net.layers
                .iter()
                .flat_map(|l| [l.weights.len(), l.biases.len()]),
        )
    }

    /// Starts one optimizer step; every block must then be updated exactly
    /// once through [`OptimizerState::update_block`].
    pub fn begin_step(&mut self) {
        self.steps += 1;
    }

    /// Updates one parameter block within the current step.
    pub fn update_block(
        &mut self,
        block: usize,
        params: &mut [f64],
        grads: &[f64],
        optimizer: &Optimizer,
        lr: f64,
    ) {
        match *optimizer {
            Optimizer::Sgd { momentum } => {
                momentum_step(params, grads, &mut self.first[block], lr, momentum);
            }
            Optimizer::Adam { beta1, beta2, epsilon } => {
                adam_step(
                    params,
                    grads,
                    &mut self.first[block],
                    &mut self.second[block],
                    self.steps,
                    lr,
                    beta1,
                    beta2,
                    epsilon,
                );
            }
        }
    }

    /// Applies one optimizer step to a dense network using
    /// already-averaged batch gradients.
    pub fn apply(
        &mut self,
        net: &mut DenseNetwork,
        grads: &Gradients,
        optimizer: &Optimizer,
        lr: f64,
    ) {
        self.begin_step();
        for l in 0..net.layers.len() {
            let layer = &mut net.layers[l];
            self.update_block(
                2 * l,
                layer.weights.as_mut_slice(),
                grads.weights[l].as_slice(),
                optimizer,
                lr,
            );
            self.update_block(
                2 * l + 1,
                layer.biases.as_mut_slice(),
                grads.biases[l].as_slice(),
                optimizer,
                lr,
            );
        }
    }
}

/// Per-epoch record of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    /// Mean squared error over the full training set, measured after each
    /// epoch's updates.
    pub epoch_mse: Vec<f64>,
}

/// Trains a network in place by mini-batch gradient descent.
///
/// Each epoch visits every sample once (in seeded shuffled order when
/// `shuffle` is set), averaging gradients within each batch. Training fails
/// with [`Error::Diverged`] when the epoch error stops being finite or
/// grows absurd, rather than returning garbage weights.
pub fn train(
    net: &mut DenseNetwork,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if inputs.is_empty() {
        return Err(Error::empty("training needs at least one sample"));
    }
    if inputs.len() != targets.len() {
        return Err(Error::param(
            "targets",
            format!("{} inputs but {} targets", inputs.len(), targets.len()),
        ));
    }
    if config.loss == Loss::CrossEntropy
        && net.layers.last().map(|l| l.activation) != Some(Activation::Softmax)
    {
        return Err(Error::param(
            "loss",
            "cross-entropy requires a softmax output layer",
        ));
    }

    let mut rng = rng_for(config.seed, Stream::BatchShuffle);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut grads = Gradients::zeros_like(net);
    let mut state = OptimizerState::new(net);
    let mut epoch_mse = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        for batch in order.chunks(config.batch_size) {
            grads.reset();
            for &i in batch {
                backprop(net, &inputs[i], &targets[i], config.loss, &mut grads)?;
            }
            grads.scale(1.0 / batch.len() as f64);
            state.apply(net, &grads, &config.optimizer, config.learning_rate);
        }
        let mse = mean_squared_error(net, inputs, targets)?;
        if !mse.is_finite() || mse > DIVERGENCE_CEILING {
            return Err(Error::Diverged { epoch, loss: mse });
        }
        epoch_mse.push(mse);
    }
    Ok(TrainOutcome { epoch_mse })
}
