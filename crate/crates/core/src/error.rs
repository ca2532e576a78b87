use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by dataset handling, training, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset file not found: {0}")]
    MissingFile(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("header is missing schema column '{column}' (no alias matched)")]
    MissingColumn { column: String },

    #[error("header is missing label column '{column}'")]
    MissingLabelColumn { column: String },

    #[error("row {line}: expected {expected} fields, found {found}")]
    RowArity {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty dataset: {reason}")]
    EmptyDataset { reason: String },

    #[error("class '{class}' has {available} records, needs at least {required}")]
    ClassTooSmall {
        class: String,
        required: usize,
        available: usize,
    },

    #[error("unknown label '{0}'")]
    UnknownLabel(String),

    #[error("label encoding produced a single class ('{0}'); need at least two")]
    SingleClass(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("feature vector has {found} entries, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("model container error: {0}")]
    ModelFormat(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn empty(reason: impl Into<String>) -> Self {
        Error::EmptyDataset {
            reason: reason.into(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
