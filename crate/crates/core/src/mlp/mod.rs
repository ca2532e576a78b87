//! Dense feed-forward networks with hand-rolled backpropagation.
//!
//! Layers are fully connected with per-layer activations. The networks are
//! deliberately small (a couple of thousand weights), so everything is
//! plain `Vec<f64>` math with no BLAS behind it.

mod train;

pub use train::{
    adam_step, backprop, backprop_input, mean_squared_error, momentum_step, squared_error,
    train, Gradients, Loss, Optimizer, OptimizerState, TrainConfig, TrainOutcome,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{argmax, Mat};
use crate::rng::{rng_for, Stream};

/// Per-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Tanh,
    Softmax,
}

impl Activation {
    /// Applies the activation to a pre-activation vector.
    pub fn apply(self, pre: &[f64]) -> Vec<f64> {
        match self {
            Activation::Identity => pre.to_vec(),
            Activation::Relu => pre.iter().map(|&v| v.max(0.0)).collect(),
            Activation::Sigmoid => pre.iter().map(|&v| sigmoid(v)).collect(),
            Activation::Tanh => pre.iter().map(|&v| v.tanh()).collect(),
            Activation::Softmax => softmax(pre),
        }
    }

    /// Pulls a loss gradient back through the activation: given dL/dpost,
    /// returns dL/dpre. Elementwise activations use their pointwise
    /// derivative (ReLU takes 0 at the kink); softmax applies its full
    /// Jacobian, `post ⊙ (g − (g · post))`.
    pub fn backward(self, pre: &[f64], post: &[f64], upstream: &[f64]) -> Vec<f64> {
        match self {
            Activation::Identity => upstream.to_vec(),
            Activation::Relu => pre
                .iter()
                .zip(upstream)
                .map(|(&p, &u)| if p > 0.0 { u } else { 0.0 })
                .collect(),
            Activation::Sigmoid => post
                .iter()
                .zip(upstream)
                .map(|(&s, &u)| u * s * (1.0 - s))
                .collect(),
            Activation::Tanh => post
                .iter()
                .zip(upstream)
                .map(|(&t, &u)| u * (1.0 - t * t))
                .collect(),
            Activation::Softmax => {
                let g_dot_s: f64 = upstream.iter().zip(post).map(|(g, s)| g * s).sum();
                post.iter()
                    .zip(upstream)
                    .map(|(&s, &g)| s * (g - g_dot_s))
                    .collect()
            }
        }
    }
}

pub(crate) fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Numerically stable softmax: shifts by the max logit before
/// exponentiating, so large logits cannot overflow.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

/// One-hot target vector for a class index.
pub fn one_hot(class: usize, n_classes: usize) -> Vec<f64> {
    let mut t = vec![0.0; n_classes];
    t[class] = 1.0;
    t
}

/// A fully connected layer: `post = activation(W x + b)` with `W` laid out
/// `(out, in)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DenseLayer {
    pub weights: Mat,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }

    fn pre_activation(&self, input: &[f64]) -> Vec<f64> {
        let mut pre = self.weights.matvec(input);
        for (p, b) in pre.iter_mut().zip(&self.biases) {
            *p += b;
        }
        pre
    }
}

/// Pre- and post-activation vectors per layer from one forward pass.
/// `post.last()` is the network output.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

/// A stack of dense layers.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DenseNetwork {
    pub layers: Vec<DenseLayer>,
}

impl DenseNetwork {
    /// Builds a network with the given layer widths (`sizes[0]` is the
    /// input dimension) and seeded Xavier-uniform weights: each layer draws
    /// from `±sqrt(6 / (fan_in + fan_out))`, biases start at zero. All
    /// hidden layers share `hidden`; the last layer uses `output`.
    pub fn new(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        seed: u64,
    ) -> Result<DenseNetwork> {
        if sizes.len() < 2 {
            return Err(Error::param(
                "sizes",
                format!("need input and output sizes, got {sizes:?}"),
            ));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::param("sizes", format!("zero-width layer in {sizes:?}")));
        }
        let mut rng = rng_for(seed, Stream::WeightInit);
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for (l, pair) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights = Mat::from_fn(fan_out, fan_in, |_, _| {
                (rng.gen::<f64>() * 2.0 - 1.0) * bound
            });
            layers.push(DenseLayer {
                weights,
                biases: vec![0.0; fan_out],
                activation: if l == sizes.len() - 2 { output } else { hidden },
            });
        }
        Ok(DenseNetwork { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("networks have layers").output_dim()
    }

    /// Trainable parameter count over all layers (weights plus biases).
    pub fn weight_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: input.len(),
            });
        }
        Ok(())
    }

    /// Runs the network, returning only the output vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        for layer in &self.layers {
            let pre = layer.pre_activation(&x);
            x = layer.activation.apply(&pre);
        }
        Ok(x)
    }

    /// Runs the network keeping every intermediate vector, as needed by
    /// backpropagation.
    pub fn forward_trace(&self, input: &[f64]) -> Result<ForwardTrace> {
        self.check_input(input)?;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        let mut x = input;
        for layer in &self.layers {
            let p = layer.pre_activation(x);
            let s = layer.activation.apply(&p);
            pre.push(p);
            post.push(s);
            x = post.last().expect("just pushed");
        }
        Ok(ForwardTrace { pre, post })
    }

    /// Index of the strongest output; ties go to the lowest index.
    pub fn predict_class(&self, input: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(input)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_matches_hand_computation() {
        let mut net = DenseNetwork::new(&[2, 2], Activation::Relu, Activation::Identity, 0).unwrap();
        net.layers[0].weights = Mat::from_fn(2, 2, |r, c| [[1.0, 2.0], [3.0, 4.0]][r][c]);
        net.layers[0].biases = vec![0.5, -0.5];
        let y = net.forward(&[1.0, 1.0]).unwrap();
        assert_eq!(y, vec![3.5, 6.5]);
    }

    #[test]
    fn softmax_outputs_are_a_distribution() {
        let s = softmax(&[1.0, 2.0, 3.0]);
        let sum: f64 = s.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(s.windows(2).all(|w| w[0] < w[1]));

        let uniform = softmax(&[4.0, 4.0, 4.0, 4.0]);
        for v in uniform {
            assert!((v - 0.25).abs() < 1e-12);
        }

        // Shift invariance and overflow safety.
        let a = softmax(&[1.0, 2.0, 3.0]);
        let b = softmax(&[1001.0, 1002.0, 1003.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn relu_gradient_is_zero_at_the_kink() {
        let g = Activation::Relu.backward(&[0.0, -1.0, 2.0], &[0.0, 0.0, 2.0], &[1.0, 1.0, 1.0]);
        assert_eq!(g, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn weight_count_sums_weights_and_biases() {
        let net = DenseNetwork::new(&[2, 3, 2], Activation::Relu, Activation::Softmax, 0).unwrap();
        assert_eq!(net.weight_count(), 17);

        // The ~2000-weight flow classifiers over 76 inputs and 2 classes.
        for (sizes, expect) in [
            (vec![76, 26, 2], 2056),
            (vec![76, 23, 10, 2], 2033),
            (vec![76, 20, 16, 11, 2], 2087),
        ] {
            let net =
                DenseNetwork::new(&sizes, Activation::Relu, Activation::Softmax, 0).unwrap();
            assert_eq!(net.weight_count(), expect);
            assert!((1800..=2400).contains(&net.weight_count()));
        }
    }

    #[test]
    fn init_is_seeded_and_within_xavier_bounds() {
        let a = DenseNetwork::new(&[4, 3, 2], Activation::Relu, Activation::Softmax, 7).unwrap();
        let b = DenseNetwork::new(&[4, 3, 2], Activation::Relu, Activation::Softmax, 7).unwrap();
        assert_eq!(a, b);
        let c = DenseNetwork::new(&[4, 3, 2], Activation::Relu, Activation::Softmax, 8).unwrap();
        assert_ne!(a, c);

        let bound = (6.0f64 / 7.0).sqrt();
        for w in a.layers[0].weights.as_slice() {
            assert!(w.abs() <= bound);
        }
        assert!(a.layers[0].biases.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn predict_class_breaks_ties_low() {
        let mut net =
            DenseNetwork::new(&[1, 2], Activation::Relu, Activation::Identity, 0).unwrap();
        net.layers[0].weights = Mat::from_fn(2, 1, |_, _| 1.0);
        net.layers[0].biases = vec![0.0, 0.0];
        assert_eq!(net.predict_class(&[3.0]).unwrap(), 0);
    }

    #[test]
    fn dimension_errors_are_reported() {
        let net = DenseNetwork::new(&[3, 2], Activation::Relu, Activation::Softmax, 0).unwrap();
        assert!(matches!(
            net.forward(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(DenseNetwork::new(&[5], Activation::Relu, Activation::Softmax, 0).is_err());
        assert!(DenseNetwork::new(&[5, 0, 2], Activation::Relu, Activation::Softmax, 0).is_err());
    }
}
