//! Convolutional and recurrent flow classifiers.
//!
//! All four architectures (CNN, RNN, LSTM, GRU) are sized to land in the
//! same ~2000-weight budget as the dense networks, so accuracy and timing
//! comparisons across families are about structure, not capacity. The CNN
//! reads a record as a univariate signal over the feature axis; the
//! recurrent models consume the whole feature vector as one time step.

mod conv;
mod recurrent;

pub use conv::{dropout_apply, maxpool1d, CnnGradients, CnnModel, Conv1d};
pub use recurrent::{
    CellKind, CellTrace, Gate, GruCell, LstmCell, RecurrentCell, RecurrentGradients,
    RecurrentModel, RnnCell,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::{squared_error, OptimizerState, TrainConfig, TrainOutcome};
use crate::rng::{rng_for, Stream};

/// Weight budget shared by the deep flow classifiers. The standard shapes
/// are asserted against it in tests; exotic custom shapes only get a log
/// warning, since being out of band breaks comparability, not correctness.
pub const WEIGHT_BUDGET: std::ops::RangeInclusive<usize> = 1500..=3000;

/// Either deep architecture behind one training/prediction surface.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum DeepModel {
    Cnn(CnnModel),
    Recurrent(RecurrentModel),
}

/// Standard CNN flow classifier: 7 filters of 4 taps, pool width 2,
/// dropout 0.3, dense layer of 8.
pub fn cnn_flow_classifier(n_features: usize, n_classes: usize, seed: u64) -> Result<CnnModel> {
    CnnModel::new(n_features, 7, 4, 2, 0.3, 8, n_classes, seed)
}

/// Standard simple-RNN flow classifier: 18 hidden units, dense layer of 10.
pub fn rnn_flow_classifier(
    n_features: usize,
    n_classes: usize,
    seed: u64,
) -> Result<RecurrentModel> {
    RecurrentModel::new(CellKind::Rnn, n_features, 18, 10, n_classes, seed)
}

/// Standard LSTM flow classifier: 6 hidden units, dense layer of 8.
pub fn lstm_flow_classifier(
    n_features: usize,
    n_classes: usize,
    seed: u64,
) -> Result<RecurrentModel> {
    RecurrentModel::new(CellKind::Lstm, n_features, 6, 8, n_classes, seed)
}

/// Standard GRU flow classifier: 8 hidden units, dense layer of 10.
pub fn gru_flow_classifier(
    n_features: usize,
    n_classes: usize,
    seed: u64,
) -> Result<RecurrentModel> {
    RecurrentModel::new(CellKind::Gru, n_features, 8, 10, n_classes, seed)
}

/// Gradient buffers for either architecture.
pub enum DeepGradients {
    Cnn(CnnGradients),
    Recurrent(RecurrentGradients),
}

impl DeepGradients {
    fn zeros_like(model: &DeepModel) -> DeepGradients {
        match model {
            DeepModel::Cnn(m) => DeepGradients::Cnn(CnnGradients::zeros_like(m)),
            DeepModel::Recurrent(m) => {
                DeepGradients::Recurrent(RecurrentGradients::zeros_like(m))
            }
        }
    }

    fn reset(&mut self) {
        match self {
            DeepGradients::Cnn(g) => g.reset(),
            DeepGradients::Recurrent(g) => g.reset(),
        }
    }

    fn scale(&mut self, s: f64) {
        match self {
            DeepGradients::Cnn(g) => g.scale(s),
            DeepGradients::Recurrent(g) => g.scale(s),
        }
    }
}

impl DeepModel {
    pub fn n_classes(&self) -> usize {
        match self {
            DeepModel::Cnn(m) => m.n_classes(),
            DeepModel::Recurrent(m) => m.n_classes(),
        }
    }

    pub fn weight_count(&self) -> usize {
        match self {
            DeepModel::Cnn(m) => m.weight_count(),
            DeepModel::Recurrent(m) => m.weight_count(),
        }
    }

    /// Number of features one record must supply.
    pub fn input_dim(&self) -> usize {
        match self {
            DeepModel::Cnn(m) => m.input_len,
            DeepModel::Recurrent(m) => m.input_dim(),
        }
    }

    /// Class probabilities for one flow record (no dropout).
    pub fn forward(&self, row: &[f64]) -> Result<Vec<f64>> {
        match self {
            DeepModel::Cnn(m) => m.forward(row),
            DeepModel::Recurrent(m) => m.forward(&[row]),
        }
    }

    pub fn predict_class(&self, row: &[f64]) -> Result<usize> {
        Ok(crate::linalg::argmax(&self.forward(row)?))
    }

    fn block_sizes(&self) -> Vec<usize> {
        match self {
            DeepModel::Cnn(m) => m.block_sizes(),
            DeepModel::Recurrent(m) => m.block_sizes(),
        }
    }
}

/// Mean squared error of a deep model over a sample set, dropout disabled.
pub fn deep_mean_squared_error(
    model: &DeepModel,
    rows: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::empty("mean squared error over no samples"));
    }
    let mut total = 0.0;
    for (row, t) in rows.iter().zip(targets) {
        total += squared_error(&model.forward(row)?, t);
    }
    Ok(total / rows.len() as f64)
}

/// Trains a deep model by mini-batch gradient descent, mirroring the dense
/// trainer: seeded shuffles, batch-averaged gradients, per-epoch MSE over
/// the full training set (without dropout), and a divergence check.
pub fn train_deep(
    model: &mut DeepModel,
    rows: &[Vec<f64>],
    targets: &[Vec<f64>],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if rows.is_empty() {
        return Err(Error::empty("training needs at least one sample"));
    }
    if rows.len() != targets.len() {
        return Err(Error::param(
            "targets",
            format!("{} inputs but {} targets", rows.len(), targets.len()),
        ));
    }
    if !WEIGHT_BUDGET.contains(&model.weight_count()) {
        log::warn!(
            "deep model has {} weights, outside the comparable band {:?}",
            model.weight_count(),
            WEIGHT_BUDGET
        );
    }

    use rand::seq::SliceRandom;
    let mut shuffle_rng = rng_for(config.seed, Stream::BatchShuffle);
    let mut dropout_rng = rng_for(config.seed, Stream::Dropout);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut grads = DeepGradients::zeros_like(model);
    let mut state = OptimizerState::for_blocks(model.block_sizes());
    let mut epoch_mse = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        if config.shuffle {
            order.shuffle(&mut shuffle_rng);
        }
        for batch in order.chunks(config.batch_size) {
            grads.reset();
            for &i in batch {
                match (&*model, &mut grads) {
                    (DeepModel::Cnn(m), DeepGradients::Cnn(g)) => {
                        m.backprop(&rows[i], &targets[i], config.loss, &mut dropout_rng, g)?;
                    }
                    (DeepModel::Recurrent(m), DeepGradients::Recurrent(g)) => {
                        m.backprop(&[rows[i].as_slice()], &targets[i], config.loss, g)?;
                    }
                    _ => unreachable!("gradients are shaped from the model"),
                }
            }
            grads.scale(1.0 / batch.len() as f64);
            match (&mut *model, &grads) {
                (DeepModel::Cnn(m), DeepGradients::Cnn(g)) => {
                    m.apply_step(g, &mut state, &config.optimizer, config.learning_rate);
                }
                (DeepModel::Recurrent(m), DeepGradients::Recurrent(g)) => {
                    m.apply_step(g, &mut state, &config.optimizer, config.learning_rate);
                }
                _ => unreachable!("gradients are shaped from the model"),
            }
        }
        let mse = deep_mean_squared_error(model, rows, targets)?;
        if !mse.is_finite() || mse > 1e6 {
            return Err(Error::Diverged { epoch, loss: mse });
        }
        epoch_mse.push(mse);
    }
    Ok(TrainOutcome { epoch_mse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::one_hot;

    fn blob_rows() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        for i in 0..60 {
            let class = i % 2;
            let base = if class == 0 { 0.2 } else { 0.8 };
            let row: Vec<f64> = (0..12)
                .map(|j| base + ((i * 13 + j * 7) % 11) as f64 * 0.004)
                .collect();
            rows.push(row);
            targets.push(one_hot(class, 2));
        }
        (rows, targets)
    }

    #[test]
    fn all_architectures_learn_separable_blobs() {
        let (rows, targets) = blob_rows();
        let config = TrainConfig {
            epochs: 40,
            batch_size: 10,
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let models: Vec<DeepModel> = vec![
            DeepModel::Cnn(CnnModel::new(12, 3, 4, 2, 0.1, 6, 2, 5).unwrap()),
            DeepModel::Recurrent(RecurrentModel::new(CellKind::Rnn, 12, 6, 4, 2, 5).unwrap()),
            DeepModel::Recurrent(RecurrentModel::new(CellKind::Lstm, 12, 4, 4, 2, 5).unwrap()),
            DeepModel::Recurrent(RecurrentModel::new(CellKind::Gru, 12, 4, 4, 2, 5).unwrap()),
        ];
        for mut model in models {
            let before = deep_mean_squared_error(&model, &rows, &targets).unwrap();
            let outcome = train_deep(&mut model, &rows, &targets, &config).unwrap();
            let after = *outcome.epoch_mse.last().unwrap();
            assert!(
                after < before,
                "training should reduce error: {before} -> {after}"
            );
            let correct = rows
                .iter()
                .zip(&targets)
                .filter(|(row, t)| {
                    model.predict_class(row).unwrap()
                        == t.iter().position(|&v| v == 1.0).unwrap()
                })
                .count();
            assert!(
                correct as f64 >= rows.len() as f64 * 0.95,
                "only {correct}/{} correct",
                rows.len()
            );
        }
    }

    #[test]
    fn deep_training_is_deterministic() {
        let (rows, targets) = blob_rows();
        let config = TrainConfig {
            epochs: 5,
            batch_size: 16,
            learning_rate: 0.01,
            seed: 2,
            ..TrainConfig::default()
        };
        let build = || DeepModel::Cnn(CnnModel::new(12, 3, 4, 2, 0.3, 6, 2, 9).unwrap());
        let mut a = build();
        let mut b = build();
        let oa = train_deep(&mut a, &rows, &targets, &config).unwrap();
        let ob = train_deep(&mut b, &rows, &targets, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(oa, ob);
    }

    #[test]
    fn standard_shapes_are_comparable() {
        let counts = [
            cnn_flow_classifier(76, 2, 0).unwrap().weight_count(),
            rnn_flow_classifier(76, 2, 0).unwrap().weight_count(),
            lstm_flow_classifier(76, 2, 0).unwrap().weight_count(),
            gru_flow_classifier(76, 2, 0).unwrap().weight_count(),
        ];
        assert_eq!(counts, [2077, 1922, 2066, 2152]);
        for c in counts {
            assert!(WEIGHT_BUDGET.contains(&c));
        }
    }
}
