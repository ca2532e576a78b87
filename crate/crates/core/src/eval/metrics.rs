//! Classification metrics over confusion matrices and epoch histories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square count table: cell (i, j) counts records of true class i
/// predicted as class j. Class order follows the label vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
    labels: Vec<String>,
}

impl ConfusionMatrix {
    /// Tallies predictions against ground truth. Both slices hold class
    /// indices into `vocab` and must have equal length.
    pub fn from_predictions(preds: &[usize], truth: &[usize], vocab: &[String]) -> Result<Self> {
        if preds.len() != truth.len() {
            return Err(Error::param(
                "predictions",
                format!("{} predictions for {} truth labels", preds.len(), truth.len()),
            ));
        }
        let n = vocab.len();
        if n == 0 {
            return Err(Error::param("vocab", "label vocabulary is empty"));
        }
        let mut counts = vec![vec![0u64; n]; n];
        for (&p, &t) in preds.iter().zip(truth) {
            if t >= n {
                return Err(Error::param("truth", format!("class index {t} out of range")));
            }
            if p >= n {
                return Err(Error::param("predictions", format!("class index {p} out of range")));
            }
            counts[t][p] += 1;
        }
        Ok(Self { counts, labels: vocab.to_vec() })
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Count of true class `truth` predicted as `pred`.
    pub fn count(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth][pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|row| row.iter().sum::<u64>()).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|c| self.counts[c][c]).sum()
    }

    /// Records whose true class is `c`.
    pub fn truth_total(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    /// Records predicted as class `c`.
    pub fn predicted_total(&self, c: usize) -> u64 {
        self.counts.iter().map(|row| row[c]).sum()
    }

    pub fn true_positives(&self, c: usize) -> u64 {
        self.counts[c][c]
    }

    pub fn false_positives(&self, c: usize) -> u64 {
        self.predicted_total(c) - self.counts[c][c]
    }

    pub fn false_negatives(&self, c: usize) -> u64 {
        self.truth_total(c) - self.counts[c][c]
    }

    pub fn true_negatives(&self, c: usize) -> u64 {
        self.total() - self.truth_total(c) - self.predicted_total(c) + self.counts[c][c]
    }
}

/// Fraction of correctly classified records: trace / total. For two
/// classes this is literally (TP + TN) / (TP + TN + FP + FN).
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::empty("confusion matrix has no observations"));
    }
    Ok(cm.trace() as f64 / total as f64)
}

/// Mean of per-class recalls over the classes that actually occur.
/// Robust to class imbalance, used for size-sweep summaries.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::empty("confusion matrix has no observations"));
    }
    let mut sum = 0.0;
    let mut present = 0usize;
    for c in 0..cm.n_classes() {
        let truth = cm.truth_total(c);
        if truth > 0 {
            sum += cm.true_positives(c) as f64 / truth as f64;
            present += 1;
        }
    }
    Ok(sum / present as f64)
}

/// Precision, recall and F-measure for one class. `degenerate` marks the
/// 0/0 conventions: the class was never predicted (precision) or never
/// present (recall); the affected metrics are reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub degenerate: bool,
}

/// Per-class precision/recall/F for class `c`, with F = 2PR / (P + R)
/// and F = 0 whenever either factor is 0.
pub fn class_metrics(cm: &ConfusionMatrix, c: usize) -> ClassMetrics {
    let tp = cm.true_positives(c) as f64;
    let predicted = cm.predicted_total(c);
    let present = cm.truth_total(c);
    let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
    let recall = if present > 0 { tp / present as f64 } else { 0.0 };
    let f_measure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassMetrics { precision, recall, f_measure, degenerate: predicted == 0 || present == 0 }
}

/// Overall accuracy plus one [`ClassMetrics`] entry per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
}

pub fn summarize(cm: &ConfusionMatrix) -> Result<MetricsSummary> {
    Ok(MetricsSummary {
        accuracy: accuracy(cm)?,
        per_class: (0..cm.n_classes()).map(|c| class_metrics(cm, c)).collect(),
    })
}

/// Median and inter-quartile range of an epoch-wise MSE history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseStats {
    pub median: f64,
    pub iqr: f64,
}

/// Quantile with linear interpolation between order statistics: the q-th
/// quantile of n sorted values sits at fractional position q * (n - 1).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let position = q * (sorted.len() - 1) as f64;
    let lower = position.floor() as usize;
    let fraction = position - lower as f64;
    if lower + 1 < sorted.len() {
        sorted[lower] + fraction * (sorted[lower + 1] - sorted[lower])
    } else {
        sorted[lower]
    }
}

/// Median and IQR (Q3 - Q1) under the linear-interpolation quartile
/// convention, so [1, 2, 3, 4] gives median 2.5 and IQR 1.5.
pub fn mse_stats(history: &[f64]) -> Result<MseStats> {
    if history.is_empty() {
        return Err(Error::param("history", "needs at least one epoch"));
    }
    let mut sorted = history.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("MSE history must be finite"));
    Ok(MseStats {
        median: quantile(&sorted, 0.5),
        iqr: quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
    })
}
