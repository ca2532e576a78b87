//! Seeded synthetic flow data.
//!
//! Two generators: Gaussian blobs for sanity checks that need separable
//! classes with known geometry, and a small dirty multi-class CSV in the
//! standard schema so the full pipeline can run without real captures.

use std::fmt::Write as _;

use rand::Rng;

use crate::dataset::{FeatureSchema, FlowDataset, FlowRecord};
use crate::error::{Error, Result};
use crate::rng::{rng_for, Stream};

/// Raw label spellings used by the bundled sample, benign first.
pub const SAMPLE_CLASSES: [&str; 4] = ["BENIGN", "DDoS", "PortScan", "Adware"];

/// Clean rows per class in the bundled sample.
pub const SAMPLE_ROWS_PER_CLASS: usize = 150;

/// Standard normal deviate via Box-Muller.
fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Blob center for one class in one feature: a two-level pattern shifted
/// by class, so every pair of classes disagrees on at least half the
/// features and the class means stay well inside (0, 1).
fn blob_center(class: usize, feature: usize, n_classes: usize) -> f64 {
    let phases = n_classes.max(2);
    if (feature + class) % phases < phases.div_ceil(2) {
        0.7
    } else {
        0.3
    }
}

/// Seeded Gaussian blobs: `n_per_class` rows per class around fixed
/// class centers with isotropic noise of the given standard deviation.
/// Rows come out class-major; fold plans reshuffle them downstream.
pub fn gaussian_blobs(
    n_classes: usize,
    n_per_class: usize,
    n_features: usize,
    noise: f64,
    seed: u64,
) -> Result<FlowDataset> {
    if n_classes < 2 {
        return Err(Error::param("n_classes", "need at least 2 classes"));
    }
    if n_per_class == 0 {
        return Err(Error::param("n_per_class", "need at least 1 row per class"));
    }
    if n_features == 0 {
        return Err(Error::param("n_features", "need at least 1 feature"));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::param("noise", format!("must be finite and non-negative, got {noise}")));
    }
    let mut rng = rng_for(seed, Stream::Synthetic);
    let mut records = Vec::with_capacity(n_classes * n_per_class);
    for class in 0..n_classes {
        for _ in 0..n_per_class {
            let features = (0..n_features)
                .map(|f| blob_center(class, f, n_classes) + noise * standard_normal(&mut rng))
                .collect();
            records.push(FlowRecord { features, label: class });
        }
    }
    Ok(FlowDataset {
        feature_names: (0..n_features).map(|f| format!("f{f}")).collect(),
        records,
        label_vocab: (0..n_classes).map(|c| format!("class{c}")).collect(),
    })
}

/// Per-feature cell for one sample row. Address and port columns get
/// plausible identifier values (they carry no class signal and the
/// standard preparation strips addresses anyway); every other feature is
/// a class-dependent level scaled to the feature's magnitude.
fn sample_cell(name: &str, class: usize, magnitude: f64, rng: &mut impl Rng) -> String {
    if name.ends_with("_ip") {
        return format!("10.{}.{}.{}", rng.gen_range(0..256), rng.gen_range(0..256), rng.gen_range(0..256));
    }
    if name.ends_with("_port") {
        return rng.gen_range(1..65536u32).to_string();
    }
    if name == "protocol" {
        return if rng.gen_bool(0.5) { "6" } else { "17" }.to_string();
    }
    let value = magnitude * (blob_center(class, name.len(), 4) + 0.05 * standard_normal(rng));
    format!("{value:.4}")
}

/// The bundled sample dataset as CSV text: four classes in the standard
/// schema, 150 clean rows each, plus broken rows (NaN, Infinity, empty
/// cells) and exact duplicates so the cleaning stage has real work. The
/// output is fixed: every call produces the same bytes.
pub fn sample_flow_csv() -> String {
    let schema = FeatureSchema::standard();
    let names = schema.names();
    let mut rng = rng_for(2017, Stream::Synthetic);

    // Shared per-feature magnitudes spanning four decades, so raw columns
    // look like the mix of counters, rates and durations in real exports.
    let magnitudes: Vec<f64> = names.iter().map(|_| 10f64.powf(rng.gen_range(0.0..4.0))).collect();

    // Class signal lives in a per-(class, feature) level; mixing the
    // feature *name length* into the level pattern keeps neighbouring
    // columns from moving in lockstep.
    let mut lines: Vec<String> = Vec::new();
    let mut clean_lines_by_class: Vec<Vec<usize>> = vec![Vec::new(); SAMPLE_CLASSES.len()];
    for (class, label) in SAMPLE_CLASSES.iter().enumerate() {
        for _ in 0..SAMPLE_ROWS_PER_CLASS {
            let mut line = String::new();
            for (f, name) in names.iter().enumerate() {
                write!(line, "{},", sample_cell(name, class, magnitudes[f], &mut rng)).unwrap();
            }
            line.push_str(label);
            clean_lines_by_class[class].push(lines.len());
            lines.push(line);
        }
    }

    // Broken rows: one otherwise-valid row per marker with a single bad
    // cell. The bad cell lands outside the address columns, which the
    // standard preparation would drop anyway.
    for (count, marker) in [(10, "NaN"), (6, "Infinity"), (4, "")] {
        for _ in 0..count {
            let class = rng.gen_range(0..SAMPLE_CLASSES.len());
            let mut cells: Vec<String> = names
                .iter()
                .enumerate()
                .map(|(f, name)| sample_cell(name, class, magnitudes[f], &mut rng))
                .collect();
            let victim = rng.gen_range(2..cells.len());
            cells[victim] = marker.to_string();
            cells.push(SAMPLE_CLASSES[class].to_string());
            lines.push(cells.join(","));
        }
    }

    // Exact duplicates of earlier clean rows, three per class.
    for class_lines in &clean_lines_by_class {
        for _ in 0..3 {
            let pick = class_lines[rng.gen_range(0..class_lines.len())];
            lines.push(lines[pick].clone());
        }
    }

    // Shuffle data lines so classes and broken rows are interleaved the
    // way real exports are. Duplicate pairs survive cleaning either way:
    // whichever copy comes first is the one kept.
    use rand::seq::SliceRandom;
    lines.shuffle(&mut rng);

    let mut out = names.join(",");
    out.push_str(",Label\n");
    for line in &lines {
        out.push_str(line);
        out.push('\n');
    }
    out
}
