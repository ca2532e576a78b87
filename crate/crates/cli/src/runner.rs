//! Experiment execution and report emission.
//!
//! `run_experiment` turns a resolved config into a [`RunReport`]: load
//! and prepare the datasets, cross-validate every algorithm, then run
//! the optional timing sweep and MSE tracking passes. `emit_report`
//! writes the artifact set; every write lands via a temp file and
//! rename, so readers never observe a partially written artifact.
//!
//! Reports carry no timestamps. Given the same config, seed, and data,
//! everything except measured wall-clock seconds is bit-identical
//! across runs.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nnids_core::algorithms::{AlgorithmOverrides, NamedAlgorithm};
use nnids_core::dataset::{
    load_flow_csv_auto, prepare, FlowDataset, MinMaxScaler, PrepareOptions,
};
use nnids_core::eval::{
    benchmark_time, cross_validate, metrics_csv, mse_stats, timing_csv, Algorithm,
    CrossValidationReport, TimingRecord,
};

use crate::config::ResolvedConfig;
use crate::error::CliError;
use crate::plot::{bar_chart, plot_curves, CurveKind, Series};

/// Machine the run executed on. Stable per host, so it never breaks
/// rerun-for-rerun report comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostInfo {
    pub os: String,
    pub arch: String,
    pub cpu_threads: usize,
}

impl HostInfo {
    pub fn capture() -> HostInfo {
        HostInfo {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            cpu_threads: std::thread::available_parallelism().map_or(1, usize::from),
        }
    }
}

/// What data preparation did: row counts survive into the report so a
/// reader can tell how much the cleaning and rebalancing dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepareStats {
    pub rows: usize,
    pub classes: Vec<String>,
    pub class_counts: Vec<usize>,
    pub dropped_non_finite: usize,
    pub dropped_duplicates: usize,
    pub stripped_columns: usize,
}

/// Per-epoch training MSE for one algorithm, with its summary stats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseSeries {
    pub algorithm: String,
    pub median: f64,
    pub iqr: f64,
    pub history: Vec<f64>,
}

/// Everything one experiment produced. `config` is the resolved
/// snapshot, not the raw file, so the report records what actually ran.
/// `files` lists every artifact `emit_report` wrote, relative to the
/// output directory; each exists by the time the report is on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ResolvedConfig,
    pub host: HostInfo,
    pub prepare: PrepareStats,
    pub cv: Vec<CrossValidationReport>,
    pub timing: Vec<TimingRecord>,
    pub mse: Vec<MseSeries>,
    pub files: Vec<String>,
}

/// Loads every configured dataset file, merges them, and runs the
/// standard preparation pipeline (strip addresses, clean, encode
/// labels, rebalance when asked).
pub fn load_and_prepare(cfg: &ResolvedConfig) -> Result<(FlowDataset, PrepareStats), CliError> {
    let mut parts = Vec::with_capacity(cfg.dataset.paths.len());
    for path in &cfg.dataset.paths {
        parts.push(load_flow_csv_auto(path).map_err(CliError::data)?);
    }
    let mut dataset = FlowDataset::merge(parts).map_err(CliError::data)?;
    let opts = PrepareOptions {
        label_mode: cfg.label_mode(),
        per_class: cfg.dataset.per_class,
        total: cfg.dataset.total,
        seed: cfg.evaluation.seed,
        strip_ips: cfg.dataset.strip_ips,
    };
    let summary = prepare(&mut dataset, &opts).map_err(CliError::data)?;
    let stats = PrepareStats {
        rows: summary.rows,
        classes: summary.classes,
        class_counts: dataset.class_counts(),
        dropped_non_finite: summary.clean.dropped_non_finite,
        dropped_duplicates: summary.clean.dropped_duplicates,
        stripped_columns: summary.stripped_columns,
    };
    Ok((dataset, stats))
}

/// Fits every configured algorithm on the full prepared dataset with
/// the MSE-tracking epoch budget and returns the loss curves. Models
/// that train without a loss curve are skipped.
fn track_mse(
    cfg: &ResolvedConfig,
    dataset: &FlowDataset,
) -> Result<Vec<MseSeries>, CliError> {
    let mut scaled = dataset.clone();
    let scaler = MinMaxScaler::fit(&scaled).map_err(CliError::runtime)?;
    scaler.transform(&mut scaled).map_err(CliError::runtime)?;
    let rows: Vec<Vec<f64>> = scaled.records.iter().map(|r| r.features.clone()).collect();
    let labels: Vec<usize> = scaled.records.iter().map(|r| r.label).collect();

    let mut series = Vec::new();
    for algo in &cfg.algorithms {
        if !algo.to_named()?.tracks_mse() {
            continue;
        }
        // Same hyperparameters, but trained for the tracking budget.
        let named = NamedAlgorithm::with_overrides(
            &algo.name,
            &AlgorithmOverrides {
                epochs: Some(cfg.evaluation.mse_epochs),
                learning_rate: Some(algo.learning_rate),
                batch_size: Some(algo.batch_size),
            },
        )
        .map_err(|e| CliError::config(format!("evaluation.mse_epochs: {e}")))?;
        let fitted = named
            .fit(&rows, &labels, scaled.n_classes(), cfg.evaluation.seed)
            .map_err(CliError::runtime)?;
        let history = fitted
            .epoch_history()
            .expect("tracks_mse implies a history")
            .to_vec();
        let stats = mse_stats(&history).map_err(CliError::runtime)?;
        series.push(MseSeries {
            algorithm: algo.name.clone(),
            median: stats.median,
            iqr: stats.iqr,
            history,
        });
    }
    Ok(series)
}

/// Runs the full experiment described by `cfg`. Cross-validation runs
/// for every algorithm; the timing sweep and MSE tracking run only when
/// the config asks for them. The returned report has an empty `files`
/// list; [`emit_report`] fills it in.
pub fn run_experiment(cfg: &ResolvedConfig) -> Result<RunReport, CliError> {
    let (dataset, prepare_stats) = load_and_prepare(cfg)?;

    let mut cv = Vec::with_capacity(cfg.algorithms.len());
    for algo in &cfg.algorithms {
        let named = algo.to_named()?;
        log::info!("cross-validating {} ({} folds)", algo.name, cfg.evaluation.folds);
        let report = cross_validate(&named, &dataset, cfg.evaluation.folds, cfg.evaluation.seed)
            .map_err(CliError::runtime)?;
        cv.push(report);
    }

    let mut timing = Vec::new();
    if cfg.evaluation.sweep {
        for algo in &cfg.algorithms {
            let named = algo.to_named()?;
            log::info!("timing sweep for {} over {:?}", algo.name, cfg.evaluation.sizes);
            let records =
                benchmark_time(&named, &dataset, &cfg.evaluation.sizes, cfg.evaluation.seed)
                    .map_err(CliError::runtime)?;
            timing.extend(records);
        }
    }

    let mse = if cfg.evaluation.track_mse { track_mse(cfg, &dataset)? } else { Vec::new() };

    Ok(RunReport {
        config: cfg.clone(),
        host: HostInfo::capture(),
        prepare: prepare_stats,
        cv,
        timing,
        mse,
        files: Vec::new(),
    })
}

/// Writes `content` to `dir/name` through a temp file and rename, so a
/// crash mid-write leaves no half-written artifact under the final name.
pub(crate) fn write_atomic(dir: &Path, name: &str, content: &[u8]) -> Result<(), CliError> {
    let tmp = dir.join(format!("{name}.tmp"));
    let target = dir.join(name);
    let fail = |e: std::io::Error| CliError::runtime(format!("writing {}: {e}", target.display()));
    let mut file = fs::File::create(&tmp).map_err(fail)?;
    file.write_all(content).map_err(fail)?;
    file.sync_all().map_err(fail)?;
    drop(file);
    fs::rename(&tmp, &target).map_err(fail)?;
    Ok(())
}

fn mse_csv(series: &[MseSeries]) -> String {
    let mut out = String::from("algorithm,epoch,mse\n");
    for s in series {
        for (i, &mse) in s.history.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", s.algorithm, i + 1, mse));
        }
    }
    out
}

fn timing_series(timing: &[TimingRecord], pick: impl Fn(&TimingRecord) -> f64) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for rec in timing {
        let point = (rec.size as f64, pick(rec));
        match series.iter_mut().find(|s| s.label == rec.algorithm) {
            Some(s) => s.points.push(point),
            None => series.push(Series { label: rec.algorithm.clone(), points: vec![point] }),
        }
    }
    series
}

/// Writes every artifact for `report` into `out_dir` and records the
/// file list both in the report and in the returned paths. Nothing is
/// written when the report has no cross-validation results. The report
/// JSON itself lands last, so a report on disk always points at files
/// that already exist.
pub fn emit_report(report: &mut RunReport, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if report.cv.is_empty() {
        return Err(CliError::runtime("report has no cross-validation results"));
    }
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::runtime(format!("creating {}: {e}", out_dir.display())))?;

    let mut files: Vec<String> = Vec::new();
    let emit = |name: &str, content: &[u8], files: &mut Vec<String>| -> Result<(), CliError> {
        write_atomic(out_dir, name, content)?;
        files.push(name.to_string());
        Ok(())
    };

    let config_text = toml::to_string_pretty(&report.config)
        .map_err(|e| CliError::runtime(format!("serializing config: {e}")))?;
    emit("config.toml", config_text.as_bytes(), &mut files)?;
    emit("metrics.csv", metrics_csv(&report.cv).as_bytes(), &mut files)?;

    let bars: Vec<(String, f64, f64)> = report
        .cv
        .iter()
        .map(|r| {
            let macro_f = r.mean.per_class.iter().map(|c| c.f_measure).sum::<f64>()
                / r.mean.per_class.len() as f64;
            (r.algorithm.clone(), r.mean.accuracy, macro_f)
        })
        .collect();
    emit("metrics_bars.svg", bar_chart(&bars)?.as_bytes(), &mut files)?;

    if !report.timing.is_empty() {
        emit("timing.csv", timing_csv(&report.timing).as_bytes(), &mut files)?;
        let time = timing_series(&report.timing, |r| r.seconds);
        emit("time_vs_size.svg", plot_curves(&time, CurveKind::TimeVsSize)?.as_bytes(), &mut files)?;
        let acc = timing_series(&report.timing, |r| r.train_accuracy);
        emit(
            "accuracy_vs_size.svg",
            plot_curves(&acc, CurveKind::AccuracyVsSize)?.as_bytes(),
            &mut files,
        )?;
    }

    if !report.mse.is_empty() {
        emit("mse.csv", mse_csv(&report.mse).as_bytes(), &mut files)?;
        let curves: Vec<Series> = report
            .mse
            .iter()
            .map(|s| Series {
                label: s.algorithm.clone(),
                points: s
                    .history
                    .iter()
                    .enumerate()
                    .map(|(i, &mse)| ((i + 1) as f64, mse))
                    .collect(),
            })
            .collect();
        emit("mse_vs_epoch.svg", plot_curves(&curves, CurveKind::MseVsEpoch)?.as_bytes(), &mut files)?;
    }

    // The report records its own name so `files` is the complete set.
    files.push("report.json".to_string());
    report.files = files.clone();
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::runtime(format!("serializing report: {e}")))?;
    write_atomic(out_dir, "report.json", json.as_bytes())?;

    Ok(files.into_iter().map(|f| out_dir.join(f)).collect())
}
