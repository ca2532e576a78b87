//! Stratified cross-validation, timing sweeps and CSV emission.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{stratified_kfold, FlowDataset, MinMaxScaler};
use crate::error::{Error, Result};
use crate::eval::metrics::{
    balanced_accuracy, summarize, ClassMetrics, ConfusionMatrix, MetricsSummary,
};
use crate::model_io::ModelPayload;

/// Training-set sizes used for the standard timing sweep.
pub const BENCHMARK_SIZES: [usize; 5] = [1_000, 2_000, 5_000, 10_000, 20_000];

/// A trained classifier ready to label scaled feature rows.
pub trait Fitted: Send {
    fn predict(&self, row: &[f64]) -> Result<usize>;

    /// Epoch-wise training MSE, for models that track one.
    fn epoch_history(&self) -> Option<&[f64]> {
        None
    }

    /// Persistable form of the model, for implementations that have one.
    fn payload(&self) -> Option<ModelPayload> {
        None
    }
}

/// A trainable classifier. `fit` receives rows already scaled to [0, 1]
/// and class indices below `n_classes`; the seed controls every random
/// choice the algorithm makes, so equal inputs give equal models.
pub trait Algorithm: Sync {
    fn name(&self) -> &str;

    fn fit(
        &self,
        rows: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        seed: u64,
    ) -> Result<Box<dyn Fitted>>;
}

/// Outcome of one held-out fold. `scaler_rows` records how many rows the
/// fold's scaler was fitted on; it must equal the train split size, never
/// the whole dataset, or test data has leaked into the preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub confusion: ConfusionMatrix,
    pub summary: MetricsSummary,
    pub scaler_rows: usize,
    pub epoch_history: Option<Vec<f64>>,
}

/// Per-class precision/recall/F averaged over folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAverage {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Fold-averaged metrics: mean of the per-fold values, not a pooled
/// confusion matrix, so every fold weighs the same.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub accuracy: f64,
    pub per_class: Vec<ClassAverage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationReport {
    pub algorithm: String,
    pub k: usize,
    pub seed: u64,
    pub label_vocab: Vec<String>,
    pub folds: Vec<FoldReport>,
    pub mean: AggregateMetrics,
}

/// Runs stratified k-fold cross-validation. Each fold fits a fresh
/// scaler on its train split only, scales both splits with it, trains on
/// the scaled train rows and tallies predictions on the held-out rows.
/// Folds run in parallel; fold `i` always trains with seed + i, so the
/// report is identical across runs and thread schedules.
pub fn cross_validate(
    algo: &dyn Algorithm,
    dataset: &FlowDataset,
    k: usize,
    seed: u64,
) -> Result<CrossValidationReport> {
    let plan = stratified_kfold(dataset, k, seed)?;
    let n_classes = dataset.n_classes();
    let folds: Vec<FoldReport> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let (train_idx, test_idx) = plan.split(fold);
            let mut train = dataset.subset(&train_idx);
            let mut test = dataset.subset(&test_idx);
            let scaler = MinMaxScaler::fit(&train)?;
            scaler.transform(&mut train)?;
            scaler.transform(&mut test)?;
            let rows: Vec<Vec<f64>> = train.records.iter().map(|r| r.features.clone()).collect();
            let labels: Vec<usize> = train.records.iter().map(|r| r.label).collect();
            let fitted = algo.fit(&rows, &labels, n_classes, seed.wrapping_add(fold as u64))?;
            let preds = test
                .records
                .iter()
                .map(|r| fitted.predict(&r.features))
                .collect::<Result<Vec<usize>>>()?;
            let truth: Vec<usize> = test.records.iter().map(|r| r.label).collect();
            let confusion = ConfusionMatrix::from_predictions(&preds, &truth, &dataset.label_vocab)?;
            let summary = summarize(&confusion)?;
            Ok(FoldReport {
                fold,
                confusion,
                summary,
                scaler_rows: scaler.fitted_rows(),
                epoch_history: fitted.epoch_history().map(<[f64]>::to_vec),
            })
        })
        .collect::<Result<_>>()?;
    let mean = aggregate(&folds, n_classes);
    Ok(CrossValidationReport {
        algorithm: algo.name().to_string(),
        k,
        seed,
        label_vocab: dataset.label_vocab.clone(),
        folds,
        mean,
    })
}

fn aggregate(folds: &[FoldReport], n_classes: usize) -> AggregateMetrics {
    let count = folds.len() as f64;
    let accuracy = folds.iter().map(|f| f.summary.accuracy).sum::<f64>() / count;
    let per_class = (0..n_classes)
        .map(|c| {
            let mut sum = ClassAverage { precision: 0.0, recall: 0.0, f_measure: 0.0 };
            for fold in folds {
                let m: &ClassMetrics = &fold.summary.per_class[c];
                sum.precision += m.precision;
                sum.recall += m.recall;
                sum.f_measure += m.f_measure;
            }
            ClassAverage {
                precision: sum.precision / count,
                recall: sum.recall / count,
                f_measure: sum.f_measure / count,
            }
        })
        .collect();
    AggregateMetrics { accuracy, per_class }
}

/// Wall-clock seconds to train on a stratified subsample of `size` rows
/// and classify every row of that subsample once. `train_accuracy` is
/// the mean per-class recall of that classify pass; it measures fit on
/// the subsample itself, not held-out generalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub algorithm: String,
    pub size: usize,
    pub seconds: f64,
    pub train_accuracy: f64,
}

/// Times train-plus-classify at each requested size. Sizes run strictly
/// one after another so measurements never compete for cores. Scaling is
/// done outside the timed region; the clock covers `fit` plus one
/// `predict` call per subsample row.
pub fn benchmark_time(
    algo: &dyn Algorithm,
    dataset: &FlowDataset,
    sizes: &[usize],
    seed: u64,
) -> Result<Vec<TimingRecord>> {
    if sizes.is_empty() {
        return Err(Error::param("sizes", "needs at least one size"));
    }
    for &size in sizes {
        if size == 0 {
            return Err(Error::param("sizes", "size 0 is not measurable"));
        }
        if size > dataset.len() {
            return Err(Error::param(
                "sizes",
                format!("size {size} exceeds the {} available rows", dataset.len()),
            ));
        }
    }
    let n_classes = dataset.n_classes();
    let mut records = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut sample = dataset.clone();
        sample.rebalance_to_total(size, seed)?;
        let scaler = MinMaxScaler::fit(&sample)?;
        scaler.transform(&mut sample)?;
        let rows: Vec<Vec<f64>> = sample.records.iter().map(|r| r.features.clone()).collect();
        let labels: Vec<usize> = sample.records.iter().map(|r| r.label).collect();

        let start = Instant::now();
        let fitted = algo.fit(&rows, &labels, n_classes, seed)?;
        let preds = rows
            .iter()
            .map(|row| fitted.predict(row))
            .collect::<Result<Vec<usize>>>()?;
        let seconds = start.elapsed().as_secs_f64();

        let confusion = ConfusionMatrix::from_predictions(&preds, &labels, &sample.label_vocab)?;
        let train_accuracy = balanced_accuracy(&confusion)?;
        log::debug!("{} at {size}: {seconds:.3}s, {train_accuracy:.3} on train", algo.name());
        records.push(TimingRecord {
            algorithm: algo.name().to_string(),
            size,
            seconds,
            train_accuracy,
        });
    }
    Ok(records)
}

fn push_csv_row(out: &mut String, fields: &[String]) {
    for (i, field) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if field.contains([',', '"', '\n']) {
            out.push('"');
            out.push_str(&field.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(field);
        }
    }
    out.push('\n');
}

/// Renders cross-validation reports as CSV: one row per (fold, class)
/// with precision/recall/F, one `all` row per fold carrying the fold
/// accuracy, and `mean` rows for the fold-averaged values. Output is
/// deterministic byte for byte.
pub fn metrics_csv(reports: &[CrossValidationReport]) -> String {
    let mut out = String::from("algorithm,fold,class,precision,recall,f_measure,accuracy\n");
    for report in reports {
        for fold in &report.folds {
            for (c, m) in fold.summary.per_class.iter().enumerate() {
                push_csv_row(
                    &mut out,
                    &[
                        report.algorithm.clone(),
                        fold.fold.to_string(),
                        report.label_vocab[c].clone(),
                        m.precision.to_string(),
                        m.recall.to_string(),
                        m.f_measure.to_string(),
                        String::new(),
                    ],
                );
            }
            push_csv_row(
                &mut out,
                &[
                    report.algorithm.clone(),
                    fold.fold.to_string(),
                    "all".to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    fold.summary.accuracy.to_string(),
                ],
            );
        }
        for (c, m) in report.mean.per_class.iter().enumerate() {
            push_csv_row(
                &mut out,
                &[
                    report.algorithm.clone(),
                    "mean".to_string(),
                    report.label_vocab[c].clone(),
                    m.precision.to_string(),
                    m.recall.to_string(),
                    m.f_measure.to_string(),
                    String::new(),
                ],
            );
        }
        push_csv_row(
            &mut out,
            &[
                report.algorithm.clone(),
                "mean".to_string(),
                "all".to_string(),
                String::new(),
                String::new(),
                String::new(),
                report.mean.accuracy.to_string(),
            ],
        );
    }
    out
}

/// Renders timing records as CSV with columns algorithm, size, seconds.
pub fn timing_csv(records: &[TimingRecord]) -> String {
    let mut out = String::from("algorithm,size,seconds\n");
    for r in records {
        push_csv_row(&mut out, &[r.algorithm.clone(), r.size.to_string(), r.seconds.to_string()]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FlowDataset, FlowRecord};
    use crate::rng::{rng_for, Stream};
    use rand::Rng;

    /// Two well-separated Gaussian-ish blobs as a FlowDataset.
    fn blob_dataset(n_per_class: usize, dim: usize, seed: u64) -> FlowDataset {
        let mut rng = rng_for(seed, Stream::Synthetic);
        let mut records = Vec::new();
        for class in 0..2usize {
            let center = if class == 0 { 0.25 } else { 0.75 };
            for _ in 0..n_per_class {
                let features: Vec<f64> =
                    (0..dim).map(|_| center + rng.gen_range(-0.05..0.05)).collect();
                records.push(FlowRecord { features, label: class });
            }
        }
        FlowDataset {
            feature_names: (0..dim).map(|i| format!("f{i}")).collect(),
            label_vocab: vec!["benign".to_string(), "attack".to_string()],
            records,
        }
    }

    /// Predicts the most frequent training class, ignoring features.
    struct Majority;

    struct MajorityFitted {
        class: usize,
    }

    impl Fitted for MajorityFitted {
        fn predict(&self, _row: &[f64]) -> Result<usize> {
            Ok(self.class)
        }
    }

    impl Algorithm for Majority {
        fn name(&self) -> &str {
            "majority"
        }

        fn fit(
            &self,
            _rows: &[Vec<f64>],
            labels: &[usize],
            n_classes: usize,
            _seed: u64,
        ) -> Result<Box<dyn Fitted>> {
            let mut counts = vec![0usize; n_classes];
            for &l in labels {
                counts[l] += 1;
            }
            let class = (0..n_classes).max_by_key(|&c| (counts[c], n_classes - c)).unwrap_or(0);
            Ok(Box::new(MajorityFitted { class }))
        }
    }

    /// Nearest-neighbor memorizer; linear scan over the training rows.
    struct Memorizer;

    struct MemorizerFitted {
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        history: Vec<f64>,
    }

    impl Fitted for MemorizerFitted {
        fn predict(&self, row: &[f64]) -> Result<usize> {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (i, r) in self.rows.iter().enumerate() {
                let d: f64 = r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            Ok(self.labels[best])
        }

        fn epoch_history(&self) -> Option<&[f64]> {
            Some(&self.history)
        }
    }

    impl Algorithm for Memorizer {
        fn name(&self) -> &str {
            "memorizer"
        }

        fn fit(
            &self,
            rows: &[Vec<f64>],
            labels: &[usize],
            _n_classes: usize,
            _seed: u64,
        ) -> Result<Box<dyn Fitted>> {
            Ok(Box::new(MemorizerFitted {
                rows: rows.to_vec(),
                labels: labels.to_vec(),
                history: vec![3.0, 2.0, 1.0],
            }))
        }
    }

    #[test]
    fn majority_baseline_scores_half_on_balanced_data() {
        let data = blob_dataset(100, 4, 11);
        let report = cross_validate(&Majority, &data, 10, 3).unwrap();
        assert_eq!(report.folds.len(), 10);
        // Balanced two-class data: always predicting one class lands at
        // 0.5 up to one-record rounding per fold.
        assert!((report.mean.accuracy - 0.5).abs() <= 0.03, "{}", report.mean.accuracy);
        assert_eq!(report.algorithm, "majority");
        assert_eq!(report.label_vocab, data.label_vocab);
    }

    #[test]
    fn memorizer_is_perfect_on_separated_blobs() {
        let data = blob_dataset(60, 4, 12);
        let report = cross_validate(&Memorizer, &data, 10, 3).unwrap();
        assert_eq!(report.mean.accuracy, 1.0);
        for fold in &report.folds {
            assert_eq!(fold.summary.accuracy, 1.0);
            assert_eq!(fold.epoch_history.as_deref(), Some(&[3.0, 2.0, 1.0][..]));
        }
        for class in &report.mean.per_class {
            assert_eq!(class.f_measure, 1.0);
        }
    }

    #[test]
    fn fold_scalers_never_see_test_rows() {
        let data = blob_dataset(50, 3, 13);
        let report = cross_validate(&Majority, &data, 5, 21).unwrap();
        let plan = stratified_kfold(&data, 5, 21).unwrap();
        for fold in &report.folds {
            let (train_idx, test_idx) = plan.split(fold.fold);
            assert_eq!(fold.scaler_rows, train_idx.len());
            assert_eq!(fold.scaler_rows + test_idx.len(), data.len());
            assert!(fold.scaler_rows < data.len());
        }
    }

    #[test]
    fn reports_are_deterministic_and_fold_ordered() {
        let data = blob_dataset(40, 3, 14);
        let a = cross_validate(&Memorizer, &data, 4, 9).unwrap();
        let b = cross_validate(&Memorizer, &data, 4, 9).unwrap();
        assert_eq!(a, b);
        for (i, fold) in a.folds.iter().enumerate() {
            assert_eq!(fold.fold, i);
        }
        // A different seed shuffles folds differently but keeps shape.
        let c = cross_validate(&Memorizer, &data, 4, 10).unwrap();
        assert_eq!(c.folds.len(), 4);
    }

    #[test]
    fn aggregate_means_match_hand_averages() {
        let data = blob_dataset(40, 3, 15);
        let report = cross_validate(&Majority, &data, 4, 2).unwrap();
        let by_hand =
            report.folds.iter().map(|f| f.summary.accuracy).sum::<f64>() / report.k as f64;
        assert_eq!(report.mean.accuracy, by_hand);
        for c in 0..2 {
            let recall =
                report.folds.iter().map(|f| f.summary.per_class[c].recall).sum::<f64>() / 4.0;
            assert_eq!(report.mean.per_class[c].recall, recall);
        }
    }

    #[test]
    fn timing_sweep_reports_positive_ordered_measurements() {
        let data = blob_dataset(3_000, 4, 16);
        let sizes = [400, 4_000];
        let records = benchmark_time(&Memorizer, &data, &sizes, 5).unwrap();
        assert_eq!(records.len(), 2);
        for (r, &size) in records.iter().zip(&sizes) {
            assert_eq!(r.algorithm, "memorizer");
            assert_eq!(r.size, size);
            assert!(r.seconds > 0.0);
            // A memorizer is exact on the rows it was trained on.
            assert_eq!(r.train_accuracy, 1.0);
        }
        // Nearest-neighbor cost grows quadratically with the subsample,
        // so the large size must not come out faster (with slack for
        // scheduler noise).
        assert!(
            records[1].seconds >= 0.8 * records[0].seconds,
            "t(4000)={} t(400)={}",
            records[1].seconds,
            records[0].seconds
        );

        assert!(benchmark_time(&Memorizer, &data, &[], 5).is_err());
        assert!(benchmark_time(&Memorizer, &data, &[0], 5).is_err());
        assert!(benchmark_time(&Memorizer, &data, &[7_000], 5).is_err());
    }

    #[test]
    fn csv_output_is_deterministic_and_complete() {
        let data = blob_dataset(30, 3, 17);
        let report = cross_validate(&Majority, &data, 3, 4).unwrap();
        let csv = metrics_csv(std::slice::from_ref(&report));
        assert_eq!(csv, metrics_csv(std::slice::from_ref(&report)));
        assert!(csv.starts_with("algorithm,fold,class,precision,recall,f_measure,accuracy\n"));
        // 3 folds x (2 class rows + 1 all row) + 2 mean class rows + 1
        // mean all row, plus the header.
        assert_eq!(csv.lines().count(), 1 + 3 * 3 + 3);
        assert!(csv.lines().any(|l| l.starts_with("majority,mean,all,,,,")));
        assert!(csv.lines().any(|l| l.starts_with("majority,0,benign,")));

        let timing = timing_csv(&[TimingRecord {
            algorithm: "majority".into(),
            size: 1_000,
            seconds: 0.25,
            train_accuracy: 0.5,
        }]);
        assert_eq!(timing, "algorithm,size,seconds\nmajority,1000,0.25\n");

        // Fields with commas are quoted.
        let mut line = String::new();
        push_csv_row(&mut line, &["a,b".to_string(), "plain".to_string()]);
        assert_eq!(line, "\"a,b\",plain\n");
    }

    #[test]
    fn cross_validate_rejects_impossible_folds() {
        let data = blob_dataset(3, 2, 18);
        // Only 3 records per class cannot stratify across 10 folds.
        assert!(cross_validate(&Majority, &data, 10, 1).is_err());
        assert!(cross_validate(&Majority, &data, 1, 1).is_err());
    }
}
