//! Evaluation: metrics, cross-validation and timing sweeps.

mod cv;
mod metrics;

pub use cv::{
    benchmark_time, cross_validate, metrics_csv, timing_csv, AggregateMetrics, Algorithm,
    ClassAverage, CrossValidationReport, Fitted, FoldReport, TimingRecord, BENCHMARK_SIZES,
};
pub use metrics::{
    accuracy, balanced_accuracy, class_metrics, mse_stats, summarize, ClassMetrics,
    ConfusionMatrix, MetricsSummary, MseStats,
};
