//! Flow datasets: loading, cleaning, rebalancing, scaling, and folding.
//!
//! A [`FlowDataset`] is a dense table of `f64` features with one integer
//! label per row. The usual pipeline is: load a CSV through the schema,
//! strip endpoint addresses, drop broken and duplicate rows, encode labels,
//! rebalance classes, then scale and fold as part of training.

mod folds;
mod io;
mod scale;
mod schema;
mod transform;

pub use folds::{stratified_kfold, FoldPlan};
pub use io::{load_flow_csv, load_flow_csv_auto, save_flow_csv};
pub use scale::MinMaxScaler;
pub use schema::{FeatureDef, FeatureFamily, FeatureSchema};
pub use transform::{CleanSummary, LabelMode};

use crate::error::{Error, Result};

/// Feature names dropped by [`FlowDataset::strip_ip_features`]. Endpoint
/// addresses identify hosts, not behaviour, and would let a model memorise
/// the capture topology.
const IP_FEATURES: [&str; 2] = ["source_ip", "destination_ip"];

/// One flow: features in dataset column order plus a label index.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub features: Vec<f64>,
    /// Index into the owning dataset's `label_vocab`.
    pub label: usize,
}

/// A labelled feature table. Every record holds exactly
/// `feature_names.len()` features and a label below `label_vocab.len()`.
#[derive(Debug, Clone)]
pub struct FlowDataset {
    pub feature_names: Vec<String>,
    pub records: Vec<FlowRecord>,
    pub label_vocab: Vec<String>,
}

impl FlowDataset {
    /// Builds a dataset from parts, checking the row invariant.
    pub fn new(
        feature_names: Vec<String>,
        records: Vec<FlowRecord>,
        label_vocab: Vec<String>,
    ) -> Result<FlowDataset> {
        for (i, r) in records.iter().enumerate() {
            if r.features.len() != feature_names.len() {
                return Err(Error::DimensionMismatch {
                    expected: feature_names.len(),
                    found: r.features.len(),
                });
            }
            if r.label >= label_vocab.len() {
                return Err(Error::Schema(format!(
                    "record {i} has label index {} but vocab holds {} entries",
                    r.label,
                    label_vocab.len()
                )));
            }
        }
        Ok(FlowDataset {
            feature_names,
            records,
            label_vocab,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.label_vocab.len()
    }

    /// Records per class, indexed like `label_vocab`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.label_vocab.len()];
        for r in &self.records {
            counts[r.label] += 1;
        }
        counts
    }

    /// Concatenates datasets with identical feature columns, unioning label
    /// vocabularies in first-seen order.
    pub fn merge(parts: Vec<FlowDataset>) -> Result<FlowDataset> {
        let mut parts = parts.into_iter();
        let mut merged = parts
            .next()
            .ok_or_else(|| Error::empty("merge called with no datasets"))?;
        for part in parts {
            if part.feature_names != merged.feature_names {
                return Err(Error::Schema(
                    "cannot merge datasets with different feature columns".into(),
                ));
            }
            let remap: Vec<usize> = part
                .label_vocab
                .iter()
                .map(|l| {
                    merged
                        .label_vocab
                        .iter()
                        .position(|m| m == l)
                        .unwrap_or_else(|| {
                            merged.label_vocab.push(l.clone());
                            merged.label_vocab.len() - 1
                        })
                })
                .collect();
            merged.records.extend(part.records.into_iter().map(|mut r| {
                r.label = remap[r.label];
                r
            }));
        }
        Ok(merged)
    }

    /// Copies the rows at `indices` into a new dataset sharing this one's
    /// columns and vocabulary.
    pub fn subset(&self, indices: &[usize]) -> FlowDataset {
        FlowDataset {
            feature_names: self.feature_names.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            label_vocab: self.label_vocab.clone(),
        }
    }

    /// Drops the source/destination address columns if present. Returns how
    /// many columns were removed.
    pub fn strip_ip_features(&mut self) -> usize {
        let keep: Vec<bool> = self
            .feature_names
            .iter()
            .map(|n| !IP_FEATURES.contains(&n.as_str()))
            .collect();
        let dropped = keep.iter().filter(|k| !**k).count();
        if dropped == 0 {
            return 0;
        }
        let mut names = keep.iter();
        self.feature_names.retain(|_| *names.next().unwrap());
        for r in &mut self.records {
            let mut cells = keep.iter();
            r.features.retain(|_| *cells.next().unwrap());
        }
        dropped
    }
}

/// Options for [`prepare`]. At most one of `per_class` / `total` may be set.
#[derive(Debug, Clone)]
pub struct PrepareOptions {
    pub label_mode: LabelMode,
    /// Downsample every class to exactly this many rows.
    pub per_class: Option<usize>,
    /// Downsample to roughly this many rows total, split evenly per class.
    pub total: Option<usize>,
    pub seed: u64,
    pub strip_ips: bool,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            label_mode: LabelMode::SingleClass,
            per_class: None,
            total: None,
            seed: 0,
            strip_ips: true,
        }
    }
}

/// What [`prepare`] did to the dataset.
#[derive(Debug, Clone)]
pub struct PrepareSummary {
    pub clean: CleanSummary,
    pub stripped_columns: usize,
    pub classes: Vec<String>,
    pub rows: usize,
}

/// Standard preparation pipeline: strip addresses, clean, encode labels,
/// optionally rebalance. Scaling is deliberately left to training code so
/// scalers can be fitted on training folds only.
pub fn prepare(dataset: &mut FlowDataset, opts: &PrepareOptions) -> Result<PrepareSummary> {
    if opts.per_class.is_some() && opts.total.is_some() {
        return Err(Error::param(
            "per_class",
            "cannot combine per_class with total",
        ));
    }
    let stripped_columns = if opts.strip_ips {
        dataset.strip_ip_features()
    } else {
        0
    };
    let clean = dataset.clean()?;
    dataset.encode_labels(opts.label_mode)?;
    if let Some(per_class) = opts.per_class {
        dataset.rebalance(per_class, opts.seed)?;
    } else if let Some(total) = opts.total {
        dataset.rebalance_to_total(total, opts.seed)?;
    }
    Ok(PrepareSummary {
        clean,
        stripped_columns,
        classes: dataset.label_vocab.clone(),
        rows: dataset.records.len(),
    })
}
