//! Row-set transforms: cleaning, class rebalancing, and label encoding.

use std::collections::HashSet;

use crate::dataset::FlowDataset;
use crate::error::{Error, Result};
use crate::rng::{rng_for, Stream};

/// Label spellings treated as non-attack traffic, lowercased.
const BENIGN_ALIASES: [&str; 6] = ["benign", "normal", "nontor", "non-tor", "nonvpn", "non-vpn"];

fn is_benign_label(raw: &str) -> bool {
    BENIGN_ALIASES.contains(&raw.trim().to_lowercase().as_str())
}

/// How raw label strings collapse into model classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// Two classes: benign traffic versus everything else.
    SingleClass,
    /// Benign plus one class per distinct attack label.
    MultiClass,
}

impl LabelMode {
    pub fn parse(s: &str) -> Option<LabelMode> {
        match s.trim().to_lowercase().as_str() {
            "single" | "single_class" | "single-class" => Some(LabelMode::SingleClass),
            "multi" | "multi_class" | "multi-class" => Some(LabelMode::MultiClass),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelMode::SingleClass => "single",
            LabelMode::MultiClass => "multi",
        }
    }
}

/// Row counts from a [`FlowDataset::clean`] pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CleanSummary {
    pub dropped_non_finite: usize,
    pub dropped_duplicates: usize,
    pub kept: usize,
}

/// Key for exact-duplicate detection. Bitwise identity except that both
/// zero signs collapse to one key, matching `==` on the values.
fn canonical_bits(v: f64) -> u64 {
    if v == 0.0 {
        0.0f64.to_bits()
    } else {
        v.to_bits()
    }
}

impl FlowDataset {
    /// Drops rows containing NaN or infinite features, then drops exact
    /// duplicates (same features and label), keeping the first occurrence.
    /// Row order is otherwise preserved. Cleaning an already-clean dataset
    /// changes nothing.
    pub fn clean(&mut self) -> Result<CleanSummary> {
        let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(self.records.len());
        let mut dropped_non_finite = 0usize;
        let mut dropped_duplicates = 0usize;
        self.records.retain(|r| {
            if r.features.iter().any(|v| !v.is_finite()) {
                dropped_non_finite += 1;
                return false;
            }
            let mut key: Vec<u64> = r.features.iter().map(|&v| canonical_bits(v)).collect();
            key.push(r.label as u64);
            if seen.insert(key) {
                true
            } else {
                dropped_duplicates += 1;
                false
            }
        });
        if self.records.is_empty() {
            return Err(Error::empty("all rows dropped during cleaning"));
        }
        Ok(CleanSummary {
            dropped_non_finite,
            dropped_duplicates,
            kept: self.records.len(),
        })
    }

    /// Downsamples every class to exactly `per_class` rows, chosen by a
    /// seeded draw without replacement. Surviving rows keep their original
    /// relative order. Classes with fewer rows than the quota are an error
    /// rather than being silently kept small.
    pub fn rebalance(&mut self, per_class: usize, seed: u64) -> Result<()> {
        if per_class == 0 {
            return Err(Error::param("per_class", "must be at least 1"));
        }
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); self.label_vocab.len()];
        for (i, r) in self.records.iter().enumerate() {
            by_class[r.label].push(i);
        }

        let mut rng = rng_for(seed, Stream::Rebalance);
        let mut keep: Vec<usize> = Vec::with_capacity(per_class * self.label_vocab.len());
        for (c, idxs) in by_class.iter().enumerate() {
            if idxs.len() < per_class {
                return Err(Error::ClassTooSmall {
                    class: self.label_vocab[c].clone(),
                    required: per_class,
                    available: idxs.len(),
                });
            }
            let chosen = rand::seq::index::sample(&mut rng, idxs.len(), per_class);
            keep.extend(chosen.iter().map(|j| idxs[j]));
        }
        keep.sort_unstable();

        let records = std::mem::take(&mut self.records);
        let mut next = 0usize;
        self.records = records
            .into_iter()
            .enumerate()
            .filter_map(|(i, r)| {
                if next < keep.len() && keep[next] == i {
                    next += 1;
                    Some(r)
                } else {
                    None
                }
            })
            .collect();
        Ok(())
    }

    /// Rebalances to roughly `total` rows overall: every class is cut to
    /// `total / n_classes` rows.
    pub fn rebalance_to_total(&mut self, total: usize, seed: u64) -> Result<()> {
        let n_classes = self
            .class_counts()
            .iter()
            .filter(|&&c| c > 0)
            .count()
            .max(1);
        let per_class = total / n_classes;
        if per_class == 0 {
            return Err(Error::param(
                "total",
                format!("{total} rows across {n_classes} classes leaves no rows per class"),
            ));
        }
        self.rebalance(per_class, seed)
    }

    /// Re-encodes raw label strings into model classes.
    ///
    /// Single-class mode maps benign spellings to class 0 (`benign`) and
    /// everything else to class 1 (`malign`). Multi-class mode keeps one
    /// class per distinct attack label (compared case-insensitively, shown
    /// with its first-seen spelling), with `benign` first and attack classes
    /// in sorted order. Both modes require at least two classes to remain.
    pub fn encode_labels(&mut self, mode: LabelMode) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::empty("cannot encode labels of an empty dataset"));
        }
        let mut present = vec![false; self.label_vocab.len()];
        for r in &self.records {
            present[r.label] = true;
        }

        let (vocab, remap): (Vec<String>, Vec<Option<usize>>) = match mode {
            LabelMode::SingleClass => {
                let remap = self
                    .label_vocab
                    .iter()
                    .map(|l| Some(usize::from(!is_benign_label(l))))
                    .collect();
                (vec!["benign".into(), "malign".into()], remap)
            }
            LabelMode::MultiClass => {
                // One group per normalised key, first-seen display spelling.
                let keys: Vec<String> = self
                    .label_vocab
                    .iter()
                    .map(|l| {
                        if is_benign_label(l) {
                            "benign".to_string()
                        } else {
                            l.trim().to_lowercase()
                        }
                    })
                    .collect();
                let mut groups: Vec<(String, String)> = Vec::new();
                for (i, key) in keys.iter().enumerate() {
                    if !present[i] || groups.iter().any(|(k, _)| k == key) {
                        continue;
                    }
                    let display = if key == "benign" {
                        "benign".to_string()
                    } else {
                        self.label_vocab[i].trim().to_string()
                    };
                    groups.push((key.clone(), display));
                }
                groups.sort_by(|a, b| {
                    (a.0 != "benign", &a.0).cmp(&(b.0 != "benign", &b.0))
                });
                let remap = keys
                    .iter()
                    .map(|key| groups.iter().position(|(k, _)| k == key))
                    .collect();
                (groups.into_iter().map(|(_, d)| d).collect(), remap)
            }
        };

        let new_labels: Vec<usize> = self
            .records
            .iter()
            .map(|r| remap[r.label].expect("labels present in records always map"))
            .collect();

        let mut class_present = vec![false; vocab.len()];
        for &l in &new_labels {
            class_present[l] = true;
        }
        if class_present.iter().filter(|p| **p).count() < 2 {
            let only = class_present
                .iter()
                .position(|p| *p)
                .map(|i| vocab[i].clone())
                .unwrap_or_default();
            return Err(Error::SingleClass(only));
        }

        for (r, l) in self.records.iter_mut().zip(new_labels) {
            r.label = l;
        }
        self.label_vocab = vocab;
        Ok(())
    }
}
