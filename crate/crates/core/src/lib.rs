//! Neural classifiers for network flow data, plus the dataset handling and
//! evaluation tooling needed to benchmark them against each other.
//!
//! The crate covers four model families over a shared dataset pipeline:
//!
//! * dense multilayer perceptrons trained by backpropagation
//!   ([`mlp`]), with convolutional and recurrent variants ([`deep`]);
//! * weightless RAM-based discriminators ([`wisard`]);
//! * prototype methods: learning vector quantisation and supervised
//!   self-organising maps ([`competitive`]);
//! * shared evaluation: confusion matrices, cross-validation, timing and
//!   error statistics ([`eval`]).
//!
//! Everything that draws random numbers takes an explicit seed, and equal
//! seeds give bit-identical results, including across thread counts.

pub mod algorithms;
pub mod competitive;
pub mod dataset;
pub mod deep;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod mlp;
pub mod model_io;
pub mod rng;
pub mod synth;
pub mod wisard;

pub use error::{Error, Result};
