//! `nnids`: train, evaluate, and benchmark network-flow classifiers.
//!
//! Subcommands share one configuration model: an optional TOML file
//! (`--config`) plus flag overrides, resolved into a full snapshot
//! before anything runs. Exit codes distinguish failure kinds:
//! 2 for configuration errors, 3 for dataset and model-file errors,
//! 4 for runtime failures.

mod config;
mod error;
mod plot;
mod runner;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use nnids_core::dataset::{save_flow_csv, FlowDataset, LabelMode, MinMaxScaler};
use nnids_core::eval::{
    benchmark_time, summarize, timing_csv, Algorithm, ConfusionMatrix, TimingRecord,
};
use nnids_core::model_io::SavedModel;

use config::{load_config, resolve, FlagOverrides, ResolvedConfig};
use error::CliError;
use plot::{plot_curves, CurveKind, Series};
use runner::{emit_report, load_and_prepare, run_experiment, write_atomic};

#[derive(Parser)]
#[command(
    name = "nnids",
    about = "Neural network intrusion detection: training and benchmarks",
    version
)]
struct Cli {
    /// Experiment config file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Dataset CSV; repeat to merge several files.
    #[arg(long, global = true)]
    dataset: Vec<PathBuf>,

    /// Algorithm to run; repeat for several. Defaults to the whole catalog.
    #[arg(long, global = true)]
    algo: Vec<String>,

    /// Cross-validation fold count.
    #[arg(long, global = true)]
    folds: Option<usize>,

    /// Seed for every random choice in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (also settable via NNIDS_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Label handling: "single" (benign vs malign) or "multi".
    #[arg(long, global = true)]
    label_mode: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean, encode, and rebalance datasets; write the prepared CSV.
    Prepare,
    /// Train one algorithm on the full dataset and save the model.
    Train,
    /// Evaluate a saved model against labelled data.
    Evaluate {
        /// Saved model file from `nnids train`.
        #[arg(long)]
        model: PathBuf,
    },
    /// Time train-plus-classify across dataset sizes.
    Bench,
    /// Run the full experiment and write the report artifacts.
    Report,
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = cli.config.as_deref().map(load_config).transpose()?;
    let flags = FlagOverrides {
        dataset: cli.dataset,
        algos: cli.algo,
        folds: cli.folds,
        seed: cli.seed,
        out: cli.out,
        label_mode: cli.label_mode,
    };
    // Evaluate infers the label mode from the model; remember whether
    // the user pinned one explicitly so contradictions can be rejected.
    let explicit_mode = flags
        .label_mode
        .clone()
        .or_else(|| file.as_ref().and_then(|f| f.dataset.label_mode.clone()));
    let cfg = resolve(file.as_ref(), &flags)?;

    match cli.command {
        Command::Prepare => cmd_prepare(&cfg),
        Command::Train => cmd_train(&cfg),
        Command::Evaluate { model } => cmd_evaluate(&cfg, &model, explicit_mode.as_deref()),
        Command::Bench => cmd_bench(&cfg),
        Command::Report => cmd_report(&cfg),
    }
}

fn ensure_out_dir(cfg: &ResolvedConfig) -> Result<&Path, CliError> {
    let dir = cfg.output.dir.as_path();
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("creating {}: {e}", dir.display())))?;
    Ok(dir)
}

fn cmd_prepare(cfg: &ResolvedConfig) -> Result<(), CliError> {
    let (dataset, stats) = load_and_prepare(cfg)?;
    let dir = ensure_out_dir(cfg)?;
    let path = dir.join("prepared.csv");
    save_flow_csv(&dataset, &path).map_err(CliError::runtime)?;
    println!(
        "prepared {} rows across {} classes (dropped {} non-finite, {} duplicates; \
         stripped {} address columns)",
        stats.rows,
        stats.classes.len(),
        stats.dropped_non_finite,
        stats.dropped_duplicates,
        stats.stripped_columns
    );
    for (class, count) in stats.classes.iter().zip(&stats.class_counts) {
        println!("  {class}: {count}");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_train(cfg: &ResolvedConfig) -> Result<(), CliError> {
    if cfg.algorithms.len() != 1 {
        return Err(CliError::config(format!(
            "algorithms.names: train needs exactly one algorithm, got {}; pass --algo",
            cfg.algorithms.len()
        )));
    }
    let algo = &cfg.algorithms[0];
    let named = algo.to_named()?;
    let (dataset, stats) = load_and_prepare(cfg)?;

    let scaler = MinMaxScaler::fit(&dataset).map_err(CliError::runtime)?;
    let mut scaled = dataset.clone();
    scaler.transform(&mut scaled).map_err(CliError::runtime)?;
    let rows: Vec<Vec<f64>> = scaled.records.iter().map(|r| r.features.clone()).collect();
    let labels: Vec<usize> = scaled.records.iter().map(|r| r.label).collect();
    let fitted = named
        .fit(&rows, &labels, scaled.n_classes(), cfg.evaluation.seed)
        .map_err(CliError::runtime)?;
    let payload = fitted
        .payload()
        .ok_or_else(|| CliError::runtime(format!("{} cannot be saved", algo.name)))?;

    let model = SavedModel::new(
        algo.name.clone(),
        dataset.label_vocab.clone(),
        dataset.feature_names.clone(),
        scaler,
        payload,
    );
    let dir = ensure_out_dir(cfg)?;
    let path = dir.join(format!("model-{}.json", algo.name));
    model.save(&path).map_err(CliError::runtime)?;
    println!(
        "trained {} on {} rows ({} classes)",
        algo.name,
        stats.rows,
        stats.classes.len()
    );
    println!("wrote {}", path.display());
    Ok(())
}

/// Reorders dataset columns to the model's feature list. Datasets may
/// carry the columns in any order but must have every one of them.
fn project_features(dataset: &FlowDataset, wanted: &[String]) -> Result<Vec<Vec<f64>>, CliError> {
    let index_of = |name: &String| {
        dataset.feature_names.iter().position(|n| n == name).ok_or_else(|| {
            CliError::data(format!("dataset lacks feature {name:?} required by the model"))
        })
    };
    let picks: Vec<usize> = wanted.iter().map(index_of).collect::<Result<_, _>>()?;
    Ok(dataset
        .records
        .iter()
        .map(|r| picks.iter().map(|&i| r.features[i]).collect())
        .collect())
}

fn cmd_evaluate(
    cfg: &ResolvedConfig,
    model_path: &Path,
    explicit_mode: Option<&str>,
) -> Result<(), CliError> {
    let model = SavedModel::load(model_path).map_err(CliError::data)?;
    let inferred = if model.label_vocab == ["benign", "malign"] {
        LabelMode::SingleClass
    } else {
        LabelMode::MultiClass
    };
    if let Some(explicit) = explicit_mode {
        if LabelMode::parse(explicit) != Some(inferred) {
            return Err(CliError::config(format!(
                "dataset.label_mode: {explicit:?} contradicts the model's label vocabulary \
                 {:?}; drop the flag or retrain",
                model.label_vocab
            )));
        }
    }

    // Evaluation scores the data as-is: same cleaning and encoding as
    // training, but never rebalanced.
    let mut eval_cfg = cfg.clone();
    eval_cfg.dataset.label_mode = inferred.as_str().to_string();
    eval_cfg.dataset.per_class = None;
    eval_cfg.dataset.total = None;
    let (dataset, _) = load_and_prepare(&eval_cfg)?;
    if dataset.label_vocab != model.label_vocab {
        return Err(CliError::data(format!(
            "dataset classes {:?} do not match the model's {:?}",
            dataset.label_vocab, model.label_vocab
        )));
    }
    let rows = project_features(&dataset, &model.feature_names)?;

    let preds = rows
        .iter()
        .map(|row| model.predict(row))
        .collect::<Result<Vec<usize>, _>>()
        .map_err(CliError::runtime)?;
    let truth: Vec<usize> = dataset.records.iter().map(|r| r.label).collect();
    let confusion = ConfusionMatrix::from_predictions(&preds, &truth, &dataset.label_vocab)
        .map_err(CliError::runtime)?;
    let summary = summarize(&confusion).map_err(CliError::runtime)?;

    println!("model {} on {} rows", model.algorithm, dataset.len());
    println!("accuracy {:.4}", summary.accuracy);
    let mut csv = String::from("class,precision,recall,f_measure,accuracy\n");
    for (class, m) in model.label_vocab.iter().zip(&summary.per_class) {
        println!(
            "  {class}: precision {:.4} recall {:.4} f-measure {:.4}",
            m.precision, m.recall, m.f_measure
        );
        csv.push_str(&format!(
            "{class},{},{},{},\n",
            m.precision, m.recall, m.f_measure
        ));
    }
    csv.push_str(&format!("all,,,,{}\n", summary.accuracy));
    let dir = ensure_out_dir(cfg)?;
    write_atomic(dir, "evaluation.csv", csv.as_bytes())?;
    println!("wrote {}", dir.join("evaluation.csv").display());
    Ok(())
}

fn cmd_bench(cfg: &ResolvedConfig) -> Result<(), CliError> {
    let (dataset, _) = load_and_prepare(cfg)?;
    let mut records: Vec<TimingRecord> = Vec::new();
    for algo in &cfg.algorithms {
        let named = algo.to_named()?;
        log::info!("timing {} over {:?}", algo.name, cfg.evaluation.sizes);
        records.extend(
            benchmark_time(&named, &dataset, &cfg.evaluation.sizes, cfg.evaluation.seed)
                .map_err(CliError::runtime)?,
        );
    }

    println!("{:<10} {:>8} {:>12} {:>10}", "algorithm", "size", "seconds", "accuracy");
    for r in &records {
        println!(
            "{:<10} {:>8} {:>12.4} {:>10.4}",
            r.algorithm, r.size, r.seconds, r.train_accuracy
        );
    }

    let dir = ensure_out_dir(cfg)?;
    write_atomic(dir, "timing.csv", timing_csv(&records).as_bytes())?;
    let to_series = |pick: fn(&TimingRecord) -> f64| -> Vec<Series> {
        let mut series: Vec<Series> = Vec::new();
        for r in &records {
            let point = (r.size as f64, pick(r));
            match series.iter_mut().find(|s| s.label == r.algorithm) {
                Some(s) => s.points.push(point),
                None => series.push(Series { label: r.algorithm.clone(), points: vec![point] }),
            }
        }
        series
    };
    write_atomic(
        dir,
        "time_vs_size.svg",
        plot_curves(&to_series(|r| r.seconds), CurveKind::TimeVsSize)?.as_bytes(),
    )?;
    write_atomic(
        dir,
        "accuracy_vs_size.svg",
        plot_curves(&to_series(|r| r.train_accuracy), CurveKind::AccuracyVsSize)?.as_bytes(),
    )?;
    for name in ["timing.csv", "time_vs_size.svg", "accuracy_vs_size.svg"] {
        println!("wrote {}", dir.join(name).display());
    }
    Ok(())
}

fn cmd_report(cfg: &ResolvedConfig) -> Result<(), CliError> {
    let mut report = run_experiment(cfg)?;
    let paths = emit_report(&mut report, &cfg.output.dir)?;
    for r in &report.cv {
        println!("{}: accuracy {:.4} over {} folds", r.algorithm, r.mean.accuracy, r.k);
    }
    for path in &paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}
