//! Named catalog of every classifier, wired into the evaluation traits.
//!
//! Each entry carries its standard hyperparameters so `nnids bench` and
//! the comparison suites run all families under one interface. Only the
//! knobs that vary per experiment (epochs, learning rate, batch size)
//! are overridable; architecture shapes are fixed per name.

use serde::{Deserialize, Serialize};

use crate::competitive::{train_competitive, CompetitiveConfig, CompetitiveModel, CompetitiveVariant};
use crate::deep::{
    cnn_flow_classifier, gru_flow_classifier, lstm_flow_classifier, rnn_flow_classifier,
    train_deep, DeepModel,
};
use crate::error::{Error, Result};
use crate::eval::{Algorithm, Fitted};
use crate::mlp::{one_hot, train, Activation, DenseNetwork, TrainConfig};
use crate::model_io::ModelPayload;
use crate::wisard::WisardModel;

/// Every algorithm name the catalog resolves, in canonical order.
pub const ALGORITHM_NAMES: [&str; 13] = [
    "mlp1", "deep2", "deep3", "cnn", "rnn", "lstm", "gru", "wisard", "lvq1", "olvq1", "lvq2",
    "lvq3", "som",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DeepKind {
    Cnn,
    Rnn,
    Lstm,
    Gru,
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    /// Fully connected network with the given hidden layer widths.
    Dense(Vec<usize>),
    Deep(DeepKind),
    Wisard,
    Competitive(CompetitiveVariant),
}

/// Optional per-experiment overrides; `None` keeps the catalog default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmOverrides {
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
}

/// A catalog entry: a classifier name plus resolved hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedAlgorithm {
    name: &'static str,
    family: Family,
    epochs: usize,
    learning_rate: f64,
    batch_size: usize,
}

impl NamedAlgorithm {
    /// Resolves a name from [`ALGORITHM_NAMES`] to its standard setup.
    pub fn new(name: &str) -> Result<NamedAlgorithm> {
        let (name, family) = match name {
            "mlp1" => ("mlp1", Family::Dense(vec![26])),
            "deep2" => ("deep2", Family::Dense(vec![23, 10])),
            "deep3" => ("deep3", Family::Dense(vec![20, 16, 11])),
            "cnn" => ("cnn", Family::Deep(DeepKind::Cnn)),
            "rnn" => ("rnn", Family::Deep(DeepKind::Rnn)),
            "lstm" => ("lstm", Family::Deep(DeepKind::Lstm)),
            "gru" => ("gru", Family::Deep(DeepKind::Gru)),
            "wisard" => ("wisard", Family::Wisard),
            "lvq1" => ("lvq1", Family::Competitive(CompetitiveVariant::Lvq1)),
            "olvq1" => ("olvq1", Family::Competitive(CompetitiveVariant::Olvq1)),
            "lvq2" => ("lvq2", Family::Competitive(CompetitiveVariant::Lvq2)),
            "lvq3" => ("lvq3", Family::Competitive(CompetitiveVariant::Lvq3)),
            "som" => ("som", Family::Competitive(CompetitiveVariant::Som)),
            other => {
                return Err(Error::param(
                    "algorithm",
                    format!("unknown algorithm {other:?}; expected one of {ALGORITHM_NAMES:?}"),
                ))
            }
        };
        let (epochs, learning_rate) = match family {
            Family::Dense(_) | Family::Deep(_) => (10, 0.001),
            Family::Wisard => (1, 0.0),
            Family::Competitive(_) => (10, 0.3),
        };
        Ok(NamedAlgorithm { name, family, epochs, learning_rate, batch_size: 100 })
    }

    /// Applies any overrides on top of the defaults.
    pub fn with_overrides(name: &str, overrides: &AlgorithmOverrides) -> Result<NamedAlgorithm> {
        let mut algo = Self::new(name)?;
        if let Some(epochs) = overrides.epochs {
            if epochs == 0 {
                return Err(Error::param("epochs", "must be at least 1"));
            }
            algo.epochs = epochs;
        }
        if let Some(lr) = overrides.learning_rate {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::param(
                    "learning_rate",
                    format!("must be positive and finite, got {lr}"),
                ));
            }
            algo.learning_rate = lr;
        }
        if let Some(batch) = overrides.batch_size {
            if batch == 0 {
                return Err(Error::param("batch_size", "must be at least 1"));
            }
            algo.batch_size = batch;
        }
        Ok(algo)
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// True when fitting reports a per-epoch MSE history. Single-pass
    /// and prototype models train without a loss curve.
    pub fn tracks_mse(&self) -> bool {
        matches!(self.family, Family::Dense(_) | Family::Deep(_))
    }

    fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            seed,
            ..TrainConfig::default()
        }
    }
}

/// All catalog entries with their standard hyperparameters.
pub fn all_algorithms() -> Vec<NamedAlgorithm> {
    ALGORITHM_NAMES
        .iter()
        .map(|name| NamedAlgorithm::new(name).expect("catalog names resolve"))
        .collect()
}

struct FittedDense {
    net: DenseNetwork,
    history: Vec<f64>,
}

impl Fitted for FittedDense {
    fn predict(&self, row: &[f64]) -> Result<usize> {
        self.net.predict_class(row)
    }

    fn epoch_history(&self) -> Option<&[f64]> {
        Some(&self.history)
    }

    fn payload(&self) -> Option<ModelPayload> {
        Some(ModelPayload::Dense(self.net.clone()))
    }
}

struct FittedDeep {
    model: DeepModel,
    history: Vec<f64>,
}

impl Fitted for FittedDeep {
    fn predict(&self, row: &[f64]) -> Result<usize> {
        self.model.predict_class(row)
    }

    fn epoch_history(&self) -> Option<&[f64]> {
        Some(&self.history)
    }

    fn payload(&self) -> Option<ModelPayload> {
        Some(ModelPayload::Deep(self.model.clone()))
    }
}

struct FittedWisard {
    model: WisardModel,
}

impl Fitted for FittedWisard {
    fn predict(&self, row: &[f64]) -> Result<usize> {
        self.model.predict_row(row)
    }

    fn payload(&self) -> Option<ModelPayload> {
        Some(ModelPayload::Wisard(self.model.clone()))
    }
}

struct FittedCompetitive {
    model: CompetitiveModel,
}

impl Fitted for FittedCompetitive {
    fn predict(&self, row: &[f64]) -> Result<usize> {
        if row.len() != self.model.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.input_dim(),
                found: row.len(),
            });
        }
        Ok(self.model.predict(row))
    }

    fn payload(&self) -> Option<ModelPayload> {
        Some(ModelPayload::Competitive(self.model.clone()))
    }
}

impl Algorithm for NamedAlgorithm {
    fn name(&self) -> &str {
        self.name
    }

    fn fit(
        &self,
        rows: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        seed: u64,
    ) -> Result<Box<dyn Fitted>> {
        if rows.is_empty() {
            return Err(Error::empty("training needs at least one sample"));
        }
        if rows.len() != labels.len() {
            return Err(Error::param(
                "labels",
                format!("{} labels for {} rows", labels.len(), rows.len()),
            ));
        }
        let n_features = rows[0].len();
        match &self.family {
            Family::Dense(hidden) => {
                let mut sizes = Vec::with_capacity(hidden.len() + 2);
                sizes.push(n_features);
                sizes.extend_from_slice(hidden);
                sizes.push(n_classes);
                let mut net =
                    DenseNetwork::new(&sizes, Activation::Relu, Activation::Softmax, seed)?;
                let targets: Vec<Vec<f64>> =
                    labels.iter().map(|&l| one_hot(l, n_classes)).collect();
                let outcome = train(&mut net, rows, &targets, &self.train_config(seed))?;
                Ok(Box::new(FittedDense { net, history: outcome.epoch_mse }))
            }
            Family::Deep(kind) => {
                let mut model = match kind {
                    DeepKind::Cnn => {
                        DeepModel::Cnn(cnn_flow_classifier(n_features, n_classes, seed)?)
                    }
                    DeepKind::Rnn => {
                        DeepModel::Recurrent(rnn_flow_classifier(n_features, n_classes, seed)?)
                    }
                    DeepKind::Lstm => {
                        DeepModel::Recurrent(lstm_flow_classifier(n_features, n_classes, seed)?)
                    }
                    DeepKind::Gru => {
                        DeepModel::Recurrent(gru_flow_classifier(n_features, n_classes, seed)?)
                    }
                };
                let targets: Vec<Vec<f64>> =
                    labels.iter().map(|&l| one_hot(l, n_classes)).collect();
                let outcome = train_deep(&mut model, rows, &targets, &self.train_config(seed))?;
                Ok(Box::new(FittedDeep { model, history: outcome.epoch_mse }))
            }
            Family::Wisard => {
                let mut model = WisardModel::standard(n_features, n_classes, seed)?;
                model.train_rows(rows, labels, self.batch_size)?;
                Ok(Box::new(FittedWisard { model }))
            }
            Family::Competitive(variant) => {
                let config = CompetitiveConfig {
                    learning_rate: self.learning_rate,
                    epochs: self.epochs,
                    chunk_size: self.batch_size,
                    seed,
                    ..CompetitiveConfig::default()
                };
                let model = train_competitive(*variant, rows, labels, n_classes, &config)?;
                Ok(Box::new(FittedCompetitive { model }))
            }
        }
    }
}
