//! Prototype-based competitive learners: the LVQ family and a supervised
//! self-organizing map.
//!
//! All five variants share the same shape: a small set of labeled
//! prototypes in feature space, trained by streaming samples one at a time
//! and nudging prototypes toward or away from each sample, then classifying
//! by the label of the nearest prototype. They expect rows scaled to [0, 1]
//! so Euclidean distances weigh features evenly.

mod lvq;
mod som;

pub use lvq::{lvq1_step, lvq2_step, lvq3_step, olvq1_step};
pub use som::{hex_location, som_neighborhood, som_train_step, SomLattice, SomNeuron};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{euclidean_distance, squared_distance};
use crate::rng::{rng_for, Stream};

/// One labeled prototype. `alpha` is the per-vector learning rate used by
/// OLVQ1 only; the other variants share a global schedule and ignore it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookVector {
    pub m: Vec<f64>,
    pub label: usize,
    pub alpha: f64,
}

/// A set of labeled prototypes queried by Euclidean distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookSet {
    vectors: Vec<CodebookVector>,
}

impl CodebookSet {
    pub fn vectors(&self) -> &[CodebookVector] {
        &self.vectors
    }

    pub(crate) fn vectors_mut(&mut self) -> &mut [CodebookVector] {
        &mut self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Index of the prototype nearest to `x`; ties break toward the lowest
    /// index.
    pub fn nearest(&self, x: &[f64]) -> usize {
        assert!(!self.vectors.is_empty(), "nearest on an empty codebook set");
        let mut best = 0;
        let mut best_d = squared_distance(&self.vectors[0].m, x);
        for (i, v) in self.vectors.iter().enumerate().skip(1) {
            let d = squared_distance(&v.m, x);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Indices of the two prototypes nearest to `x`, nearest first. Equal
    /// distances rank by index, so the result is deterministic.
    pub fn two_nearest(&self, x: &[f64]) -> (usize, usize) {
        assert!(self.vectors.len() >= 2, "two_nearest needs at least two prototypes");
        let d0 = squared_distance(&self.vectors[0].m, x);
        let d1 = squared_distance(&self.vectors[1].m, x);
        let (mut first, mut first_d, mut second, mut second_d) =
            if d1 < d0 { (1, d1, 0, d0) } else { (0, d0, 1, d1) };
        for (i, v) in self.vectors.iter().enumerate().skip(2) {
            let d = squared_distance(&v.m, x);
            if d < first_d {
                second = first;
                second_d = first_d;
                first = i;
                first_d = d;
            } else if d < second_d {
                second = i;
                second_d = d;
            }
        }
        (first, second)
    }

    /// Label of the prototype nearest to `x`.
    pub fn predict(&self, x: &[f64]) -> usize {
        self.vectors[self.nearest(x)].label
    }

    /// Feature dimension of the prototypes.
    pub fn input_dim(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.m.len())
    }

    /// Checks structural invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.vectors.first() else {
            return Err(Error::ModelFormat("codebook set is empty".into()));
        };
        let dim = first.m.len();
        for v in &self.vectors {
            if v.m.len() != dim {
                return Err(Error::ModelFormat("codebook dimensions disagree".into()));
            }
            if !(v.alpha > 0.0 && v.alpha < 1.0) {
                return Err(Error::ModelFormat("codebook learning rate out of (0, 1)".into()));
            }
        }
        Ok(())
    }
}

/// Picks `count` record indices, stratified over classes in class order:
/// class c contributes floor(count / classes) records, plus one more for
/// the first `count % classes` classes. Within a class the picks are a
/// seeded sample without replacement, kept in original record order.
pub(crate) fn stratified_sample(
    labels: &[usize],
    n_classes: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if n_classes == 0 {
        return Err(Error::param("n_classes", "must be at least 1"));
    }
    if count < n_classes {
        return Err(Error::param(
            "count",
            format!("{count} prototypes cannot cover {n_classes} classes"),
        ));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &label) in labels.iter().enumerate() {
        if label >= n_classes {
            return Err(Error::param("labels", format!("label {label} out of range")));
        }
        by_class[label].push(i);
    }
    let share = count / n_classes;
    let extra = count % n_classes;
    let mut rng = rng_for(seed, Stream::CodebookInit);
    let mut picked = Vec::with_capacity(count);
    for (class, pool) in by_class.iter().enumerate() {
        let need = share + usize::from(class < extra);
        if pool.len() < need {
            return Err(Error::ClassTooSmall {
                class: class.to_string(),
                required: need,
                available: pool.len(),
            });
        }
        let mut take: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), need)
            .into_iter()
            .map(|j| pool[j])
            .collect();
        take.sort_unstable();
        picked.extend(take);
    }
    Ok(picked)
}

/// Seeds a codebook set by sampling training rows class-stratified; each
/// prototype starts at a real data point and inherits its label.
pub fn init_codebooks(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    count: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<CodebookSet> {
    if rows.len() != labels.len() {
        return Err(Error::param(
            "labels",
            format!("{} labels for {} rows", labels.len(), rows.len()),
        ));
    }
    if !(learning_rate > 0.0 && learning_rate < 1.0) {
        return Err(Error::param("learning_rate", "must be in (0, 1)"));
    }
    let picked = stratified_sample(labels, n_classes, count, seed)?;
    let vectors = picked
        .into_iter()
        .map(|i| CodebookVector { m: rows[i].clone(), label: labels[i], alpha: learning_rate })
        .collect();
    Ok(CodebookSet { vectors })
}

/// The five competitive variants sharing one training driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompetitiveVariant {
    Lvq1,
    Olvq1,
    Lvq2,
    Lvq3,
    Som,
}

impl CompetitiveVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Lvq1 => "lvq1",
            Self::Olvq1 => "olvq1",
            Self::Lvq2 => "lvq2",
            Self::Lvq3 => "lvq3",
            Self::Som => "som",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lvq1" => Ok(Self::Lvq1),
            "olvq1" => Ok(Self::Olvq1),
            "lvq2" => Ok(Self::Lvq2),
            "lvq3" => Ok(Self::Lvq3),
            "som" => Ok(Self::Som),
            other => Err(Error::param("variant", format!("unknown variant '{other}'"))),
        }
    }
}

/// Hyperparameters shared by the competitive trainers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetitiveConfig {
    /// Number of LVQ prototypes.
    pub codebooks: usize,
    /// Initial learning rate; decays linearly to 0 over the run.
    pub learning_rate: f64,
    pub epochs: usize,
    /// Relative window width for the LVQ2/LVQ3 update gate.
    pub window: f64,
    /// Same-class step factor for LVQ3.
    pub epsilon: f64,
    pub som_rows: usize,
    pub som_cols: usize,
    /// Initial SOM neighborhood radius, in lattice spacings; decays
    /// linearly to one spacing over the run.
    pub som_radius: f64,
    /// Row-chunk size for progress logging; no effect on the result.
    pub chunk_size: usize,
    pub seed: u64,
}

impl Default for CompetitiveConfig {
    fn default() -> Self {
        Self {
            codebooks: 20,
            learning_rate: 0.3,
            epochs: 10,
            window: 0.3,
            epsilon: 0.1,
            som_rows: 8,
            som_cols: 8,
            som_radius: 8.0,
            chunk_size: 100,
            seed: 0,
        }
    }
}

impl CompetitiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.codebooks == 0 {
            return Err(Error::param("codebooks", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate < 1.0) {
            return Err(Error::param("learning_rate", "must be in (0, 1)"));
        }
        if !(self.window > 0.0 && self.window < 1.0) {
            return Err(Error::param("window", "must be in (0, 1)"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon <= 1.0) {
            return Err(Error::param("epsilon", "must be in [0, 1]"));
        }
        if self.som_rows == 0 || self.som_cols == 0 {
            return Err(Error::param("som_rows", "lattice must be non-empty"));
        }
        if !(self.som_radius >= 1.0) {
            return Err(Error::param("som_radius", "must be at least 1 spacing"));
        }
        if self.chunk_size == 0 {
            return Err(Error::param("chunk_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// A trained competitive model: labeled prototypes either free-floating
/// (LVQ) or tied to lattice positions (SOM).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CompetitiveModel {
    Codebooks(CodebookSet),
    Som(SomLattice),
}

impl CompetitiveModel {
    /// Label of the nearest prototype / best-matching unit.
    pub fn predict(&self, x: &[f64]) -> usize {
        match self {
            Self::Codebooks(cb) => cb.predict(x),
            Self::Som(lattice) => lattice.predict(x),
        }
    }

    /// Feature dimension of the prototypes.
    pub fn input_dim(&self) -> usize {
        match self {
            Self::Codebooks(cb) => cb.input_dim(),
            Self::Som(lattice) => lattice.input_dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Codebooks(cb) => cb.validate(),
            Self::Som(lattice) => lattice.validate(),
        }
    }
}

/// Label of the nearest prototype; ties break toward the lowest prototype
/// index.
pub fn predict_nearest(model: &CompetitiveModel, x: &[f64]) -> usize {
    model.predict(x)
}

/// Trains one competitive variant by streaming rows in seeded shuffled
/// order for `cfg.epochs` passes. The learning rate decays linearly from
/// `cfg.learning_rate` to 0 over the whole run (OLVQ1 instead keeps
/// per-prototype rates, capped at the initial rate); the SOM radius decays
/// linearly from `cfg.som_radius` to 1. With zero epochs the initial
/// model is returned unchanged. Deterministic for a fixed seed.
pub fn train_competitive(
    variant: CompetitiveVariant,
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    cfg: &CompetitiveConfig,
) -> Result<CompetitiveModel> {
    cfg.validate()?;
    if rows.len() != labels.len() {
        return Err(Error::param(
            "labels",
            format!("{} labels for {} rows", labels.len(), rows.len()),
        ));
    }
    if rows.is_empty() {
        return Err(Error::empty("no rows to train on"));
    }

    let mut model = match variant {
        CompetitiveVariant::Som => CompetitiveModel::Som(SomLattice::init(
            cfg.som_rows,
            cfg.som_cols,
            rows,
            labels,
            n_classes,
            cfg.seed,
        )?),
        _ => CompetitiveModel::Codebooks(init_codebooks(
            rows,
            labels,
            n_classes,
            cfg.codebooks,
            cfg.learning_rate,
            cfg.seed,
        )?),
    };

    let total_steps = cfg.epochs * rows.len();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut order_rng = rng_for(cfg.seed, Stream::SampleOrder);
    let mut step = 0usize;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut order_rng);
        for (done, &idx) in order.iter().enumerate() {
            let frac = step as f64 / total_steps as f64;
            let alpha = cfg.learning_rate * (1.0 - frac);
            let (x, label) = (&rows[idx], labels[idx]);
            match (&mut model, variant) {
                (CompetitiveModel::Codebooks(cb), CompetitiveVariant::Lvq1) => {
                    lvq1_step(cb, x, label, alpha);
                }
                (CompetitiveModel::Codebooks(cb), CompetitiveVariant::Olvq1) => {
                    olvq1_step(cb, x, label, cfg.learning_rate);
                }
                (CompetitiveModel::Codebooks(cb), CompetitiveVariant::Lvq2) => {
                    lvq2_step(cb, x, label, alpha, cfg.window);
                }
                (CompetitiveModel::Codebooks(cb), CompetitiveVariant::Lvq3) => {
                    lvq3_step(cb, x, label, alpha, cfg.window, cfg.epsilon);
                }
                (CompetitiveModel::Som(lattice), CompetitiveVariant::Som) => {
                    let sigma = cfg.som_radius + (1.0 - cfg.som_radius) * frac;
                    som_train_step(lattice, x, label, alpha, sigma);
                }
                _ => unreachable!("model shape always matches the variant"),
            }
            step += 1;
            if (done + 1) % cfg.chunk_size == 0 {
                log::debug!(
                    "{}: epoch {epoch}, {} / {} rows",
                    variant.as_str(),
                    done + 1,
                    rows.len()
                );
            }
        }
    }
    Ok(model)
}

/// Euclidean distance from `x` to a prototype, for window tests.
pub(crate) fn prototype_distance(v: &CodebookVector, x: &[f64]) -> f64 {
    euclidean_distance(&v.m, x)
}

#[cfg(test)]
pub(crate) fn set_from_vectors(vectors: Vec<CodebookVector>) -> CodebookSet {
    CodebookSet { vectors }
}
