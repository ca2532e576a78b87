//! Experiment configuration: the TOML file schema, built-in defaults,
//! and resolution against command-line overrides.
//!
//! Resolution order is flags over file over defaults, except the output
//! root where the `NNIDS_OUT` environment variable slots in between the
//! file and the built-in default. The resolved form has every field
//! expanded; serializing it is the config snapshot written into reports.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nnids_core::algorithms::{AlgorithmOverrides, NamedAlgorithm, ALGORITHM_NAMES};
use nnids_core::dataset::LabelMode;
use nnids_core::eval::BENCHMARK_SIZES;

use crate::error::CliError;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "NNIDS_OUT";
/// Output root when neither flags, config, nor environment name one.
pub const DEFAULT_OUT: &str = "nnids-out";

/// Raw config file shape. Every field is optional; unknown keys are
/// rejected by name so typos surface instead of silently using defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub algorithms: AlgorithmsSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub paths: Option<Vec<PathBuf>>,
    pub label_mode: Option<String>,
    pub per_class: Option<usize>,
    pub total: Option<usize>,
    pub strip_ips: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmsSection {
    pub names: Option<Vec<String>>,
    /// Per-algorithm hyperparameter overrides, keyed by algorithm name.
    #[serde(default)]
    pub overrides: std::collections::BTreeMap<String, AlgorithmOverrides>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub sweep: Option<bool>,
    pub sizes: Option<Vec<usize>>,
    pub track_mse: Option<bool>,
    pub mse_epochs: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Values taken from command-line flags; `None`/empty means not given.
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub dataset: Vec<PathBuf>,
    pub algos: Vec<String>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub label_mode: Option<String>,
}

/// Fully expanded configuration: what the run actually uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub dataset: ResolvedDataset,
    pub algorithms: Vec<ResolvedAlgorithm>,
    pub evaluation: ResolvedEvaluation,
    pub output: ResolvedOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedDataset {
    pub paths: Vec<PathBuf>,
    pub label_mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_class: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total: Option<usize>,
    pub strip_ips: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedAlgorithm {
    pub name: String,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedEvaluation {
    pub folds: usize,
    pub seed: u64,
    pub sweep: bool,
    pub sizes: Vec<usize>,
    pub track_mse: bool,
    pub mse_epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedOutput {
    pub dir: PathBuf,
}

impl ResolvedConfig {
    pub fn label_mode(&self) -> LabelMode {
        LabelMode::parse(&self.dataset.label_mode).expect("validated at resolution")
    }
}

impl ResolvedAlgorithm {
    /// Rebuilds the runnable algorithm from the snapshot values. A zero
    /// learning rate marks models that train without one and is kept as
    /// the catalog default rather than passed as an override.
    pub fn to_named(&self) -> Result<NamedAlgorithm, CliError> {
        NamedAlgorithm::with_overrides(
            &self.name,
            &AlgorithmOverrides {
                epochs: Some(self.epochs),
                learning_rate: (self.learning_rate > 0.0).then_some(self.learning_rate),
                batch_size: Some(self.batch_size),
            },
        )
        .map_err(|e| CliError::config(format!("algorithms.names: {e}")))
    }
}

/// Reads and parses a config file. Parse errors carry toml's message,
/// which names the offending key and line.
pub fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("config file {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::config(format!("config file {}: {e}", path.display())))
}

/// Merges defaults, the optional config file, and command-line flags
/// into a validated [`ResolvedConfig`]. Every error names the field in
/// config-file notation (`section.key`).
pub fn resolve(file: Option<&ConfigFile>, flags: &FlagOverrides) -> Result<ResolvedConfig, CliError> {
    let empty = ConfigFile::default();
    let file = file.unwrap_or(&empty);

    let paths = if !flags.dataset.is_empty() {
        flags.dataset.clone()
    } else {
        file.dataset.paths.clone().unwrap_or_default()
    };
    if paths.is_empty() {
        return Err(CliError::config(
            "dataset.paths: at least one dataset file is required (or pass --dataset)",
        ));
    }

    let label_mode_raw = flags
        .label_mode
        .clone()
        .or_else(|| file.dataset.label_mode.clone())
        .unwrap_or_else(|| "single".to_string());
    let label_mode = LabelMode::parse(&label_mode_raw).ok_or_else(|| {
        CliError::config(format!(
            "dataset.label_mode: expected \"single\" or \"multi\", got {label_mode_raw:?}"
        ))
    })?;

    let per_class = file.dataset.per_class;
    let total = file.dataset.total;
    if per_class.is_some() && total.is_some() {
        return Err(CliError::config(
            "dataset.per_class: cannot be combined with dataset.total",
        ));
    }
    if per_class == Some(0) {
        return Err(CliError::config("dataset.per_class: must be at least 1"));
    }
    if total == Some(0) {
        return Err(CliError::config("dataset.total: must be at least 1"));
    }

    let names = if !flags.algos.is_empty() {
        flags.algos.clone()
    } else {
        file.algorithms
            .names
            .clone()
            .unwrap_or_else(|| ALGORITHM_NAMES.iter().map(|s| s.to_string()).collect())
    };
    if names.is_empty() {
        return Err(CliError::config("algorithms.names: at least one algorithm is required"));
    }
    for name in file.algorithms.overrides.keys() {
        if NamedAlgorithm::new(name).is_err() {
            return Err(CliError::config(format!(
                "algorithms.overrides.{name}: unknown algorithm; expected one of {ALGORITHM_NAMES:?}"
            )));
        }
    }
    let mut algorithms = Vec::with_capacity(names.len());
    for name in &names {
        let overrides = file.algorithms.overrides.get(name).copied().unwrap_or_default();
        let named = NamedAlgorithm::with_overrides(name, &overrides)
            .map_err(|e| CliError::config(format!("algorithms.names: {e}")))?;
        algorithms.push(ResolvedAlgorithm {
            name: name.clone(),
            epochs: named.epochs(),
            learning_rate: named.learning_rate(),
            batch_size: named.batch_size(),
        });
    }

    let folds = flags.folds.or(file.evaluation.folds).unwrap_or(10);
    if folds < 2 {
        return Err(CliError::config(format!("evaluation.folds: need at least 2, got {folds}")));
    }
    let seed = flags.seed.or(file.evaluation.seed).unwrap_or(0);
    let sweep = file.evaluation.sweep.unwrap_or(false);
    let sizes = file.evaluation.sizes.clone().unwrap_or_else(|| BENCHMARK_SIZES.to_vec());
    if sizes.is_empty() {
        return Err(CliError::config("evaluation.sizes: needs at least one size"));
    }
    if sizes.contains(&0) {
        return Err(CliError::config("evaluation.sizes: size 0 is not measurable"));
    }
    let track_mse = file.evaluation.track_mse.unwrap_or(false);
    let mse_epochs = file.evaluation.mse_epochs.unwrap_or(100);
    if mse_epochs == 0 {
        return Err(CliError::config("evaluation.mse_epochs: must be at least 1"));
    }

    let dir = flags
        .out
        .clone()
        .or_else(|| file.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    Ok(ResolvedConfig {
        dataset: ResolvedDataset {
            paths,
            label_mode: label_mode.as_str().to_string(),
            per_class,
            total,
            strip_ips: file.dataset.strip_ips.unwrap_or(true),
        },
        algorithms,
        evaluation: ResolvedEvaluation { folds, seed, sweep, sizes, track_mse, mse_epochs },
        output: ResolvedOutput { dir },
    })
}
