//! Versioned model persistence.
//!
//! Every trained model is saved as one JSON document: a small header
//! (format magic, version, algorithm name, label vocabulary, feature
//! names, the fitted scaler) plus an algorithm-specific payload. The
//! header carries everything needed to classify raw, unscaled feature
//! rows, so a loaded model is self-contained.
//!
//! Round trips are bit-exact: floats serialize in shortest-round-trip
//! form and parse back to the identical bits, and WiSARD RAM contents
//! travel as packed words.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::competitive::CompetitiveModel;
use crate::dataset::MinMaxScaler;
use crate::deep::DeepModel;
use crate::error::{Error, Result};
use crate::mlp::DenseNetwork;
use crate::wisard::WisardModel;

/// Format tag expected at the head of every model file.
pub const MODEL_MAGIC: &str = "nnids-model";
/// Current format version; bump on incompatible layout changes.
pub const MODEL_VERSION: u32 = 1;

/// The algorithm-specific half of a saved model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelPayload {
    Dense(DenseNetwork),
    Deep(DeepModel),
    Wisard(WisardModel),
    Competitive(CompetitiveModel),
}

impl ModelPayload {
    /// Number of features one raw row must supply.
    pub fn input_dim(&self) -> usize {
        match self {
            Self::Dense(m) => m.input_dim(),
            Self::Deep(m) => m.input_dim(),
            Self::Wisard(m) => m.retina().n_features(),
            Self::Competitive(m) => m.input_dim(),
        }
    }

    /// Predicted class index for one scaled row.
    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        match self {
            Self::Dense(m) => m.predict_class(row),
            Self::Deep(m) => m.predict_class(row),
            Self::Wisard(m) => m.predict_row(row),
            Self::Competitive(m) => {
                if row.len() != m.input_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: m.input_dim(),
                        found: row.len(),
                    });
                }
                Ok(m.predict(row))
            }
        }
    }

    /// Structural sanity of a deserialized payload: layer chains connect,
    /// matrix buffers match their shapes, and class-indexed structures
    /// cover exactly `n_classes`.
    pub fn validate(&self, n_classes: usize) -> Result<()> {
        let check_dense = |net: &DenseNetwork, out: usize| -> Result<()> {
            if net.layers.is_empty() {
                return Err(Error::ModelFormat("network has no layers".into()));
            }
            let mut dim = net.input_dim();
            for layer in &net.layers {
                if layer.weights.len() != layer.input_dim() * layer.output_dim()
                    || layer.biases.len() != layer.output_dim()
                    || layer.input_dim() != dim
                {
                    return Err(Error::ModelFormat("layer shapes do not connect".into()));
                }
                dim = layer.output_dim();
            }
            if dim != out {
                return Err(Error::ModelFormat(format!(
                    "network emits {dim} classes, expected {out}"
                )));
            }
            Ok(())
        };
        match self {
            Self::Dense(m) => check_dense(m, n_classes),
            Self::Deep(m) => {
                if m.n_classes() != n_classes {
                    return Err(Error::ModelFormat(format!(
                        "model emits {} classes, expected {n_classes}",
                        m.n_classes()
                    )));
                }
                match m {
                    DeepModel::Cnn(c) => check_dense(&c.head, n_classes),
                    DeepModel::Recurrent(r) => check_dense(&r.head, n_classes),
                }
            }
            Self::Wisard(m) => {
                m.validate()?;
                if m.n_classes() != n_classes {
                    return Err(Error::ModelFormat(format!(
                        "model has {} discriminators, expected {n_classes}",
                        m.n_classes()
                    )));
                }
                Ok(())
            }
            Self::Competitive(m) => {
                m.validate()?;
                let max_label = match m {
                    CompetitiveModel::Codebooks(cb) => {
                        cb.vectors().iter().map(|v| v.label).max().unwrap_or(0)
                    }
                    CompetitiveModel::Som(lattice) => {
                        lattice.neurons().iter().map(|n| n.label).max().unwrap_or(0)
                    }
                };
                if max_label >= n_classes {
                    return Err(Error::ModelFormat(format!(
                        "prototype label {max_label} outside {n_classes} classes"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// A complete, self-contained trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    magic: String,
    version: u32,
    pub algorithm: String,
    pub label_vocab: Vec<String>,
    pub feature_names: Vec<String>,
    pub scaler: MinMaxScaler,
    pub payload: ModelPayload,
}

impl SavedModel {
    pub fn new(
        algorithm: impl Into<String>,
        label_vocab: Vec<String>,
        feature_names: Vec<String>,
        scaler: MinMaxScaler,
        payload: ModelPayload,
    ) -> Self {
        Self {
            magic: MODEL_MAGIC.to_string(),
            version: MODEL_VERSION,
            algorithm: algorithm.into(),
            label_vocab,
            feature_names,
            scaler,
            payload,
        }
    }

    /// Full consistency check; run on every load and before every save.
    pub fn validate(&self) -> Result<()> {
        if self.magic != MODEL_MAGIC {
            return Err(Error::ModelFormat(format!("bad magic '{}'", self.magic)));
        }
        if self.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported version {} (expected {MODEL_VERSION})",
                self.version
            )));
        }
        if self.label_vocab.len() < 2 {
            return Err(Error::ModelFormat("label vocabulary needs at least 2 classes".into()));
        }
        if self.feature_names.len() != self.payload.input_dim() {
            return Err(Error::ModelFormat(format!(
                "{} feature names for a {}-input model",
                self.feature_names.len(),
                self.payload.input_dim()
            )));
        }
        if self.scaler.n_features() != self.feature_names.len() {
            return Err(Error::ModelFormat(format!(
                "scaler covers {} features, model expects {}",
                self.scaler.n_features(),
                self.feature_names.len()
            )));
        }
        self.payload.validate(self.label_vocab.len())
    }

    /// Serializes to `path` atomically: the document lands under a
    /// temporary name first and is renamed into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let json = serde_json::to_string(self)?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, &json).map_err(|source| Error::Io { path: tmp.clone(), source })?;
        fs::rename(&tmp, path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| match source.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io { path: path.to_path_buf(), source },
        })?;
        let model: SavedModel = serde_json::from_slice(&bytes)?;
        model.validate()?;
        Ok(model)
    }

    /// Classifies one raw (unscaled) feature row through the embedded
    /// scaler and model; returns the class index.
    pub fn predict(&self, raw: &[f64]) -> Result<usize> {
        let mut row = raw.to_vec();
        self.scaler.transform_row(&mut row)?;
        self.payload.predict(&row)
    }

    /// Classifies one raw feature row and returns the class name.
    pub fn predict_label(&self, raw: &[f64]) -> Result<&str> {
        let class = self.predict(raw)?;
        Ok(self.label_vocab[class].as_str())
    }
}
