//! Stratified k-fold assignment for cross-validation.

use rand::seq::SliceRandom;

use crate::dataset::FlowDataset;
use crate::error::{Error, Result};
use crate::rng::{rng_for, Stream};

/// A fold assignment over one dataset: `assignments[i]` is the fold that
/// holds record `i` out as test data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// Record indices held out by `fold`, in dataset order.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        assert!(fold < self.k, "fold {fold} out of range for k={}", self.k);
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Splits record indices into `(train, test)` for one fold.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        assert!(fold < self.k, "fold {fold} out of range for k={}", self.k);
        let mut train = Vec::with_capacity(self.assignments.len());
        let mut test = Vec::new();
        for (i, &f) in self.assignments.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }
}

/// Assigns every record to one of `k` folds so that each class is spread
/// across folds as evenly as possible (per-class counts differ by at most
/// one between folds). The shuffle is seeded, so the same inputs always
/// produce the same plan. Every class must have at least `k` records;
/// otherwise some fold would train without that class entirely.
pub fn stratified_kfold(dataset: &FlowDataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::param("k", format!("need at least 2 folds, got {k}")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.n_classes()];
    for (i, r) in dataset.records.iter().enumerate() {
        by_class[r.label].push(i);
    }

    let mut rng = rng_for(seed, Stream::FoldShuffle);
    let mut assignments = vec![0usize; dataset.len()];
    for (c, idxs) in by_class.iter_mut().enumerate() {
        if idxs.is_empty() {
            continue;
        }
        if idxs.len() < k {
            return Err(Error::ClassTooSmall {
                class: dataset.label_vocab[c].clone(),
                required: k,
                available: idxs.len(),
            });
        }
        idxs.shuffle(&mut rng);
        for (pos, &i) in idxs.iter().enumerate() {
            assignments[i] = pos % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}
