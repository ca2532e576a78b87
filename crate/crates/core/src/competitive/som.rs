//! Supervised self-organizing map on a hexagonal lattice.
//!
//! Neurons live at fixed planar positions with unit spacing between
//! lattice neighbors. Each carries a reference vector in feature space and
//! a fixed class label. A training step finds the best-matching unit by
//! feature distance, then updates every neuron near the winner on the
//! lattice with a Gaussian-weighted step: toward the sample when the
//! neuron's label matches the sample's, away when it does not.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::squared_distance;

use super::stratified_sample;

/// Kernel weights below this fraction of the learning rate are treated as
/// zero and the neuron is skipped. The error per skipped neuron is below
/// 1e-4 * alpha per step, which is negligible against the step itself.
pub const SOM_KERNEL_CUTOFF: f64 = 1e-4;

/// Planar position of the lattice cell at (row, col): odd rows shift right
/// by half a cell and rows stack sqrt(3)/2 apart, so all six hexagonal
/// neighbors of a cell sit exactly one unit away.
pub fn hex_location(row: usize, col: usize) -> [f64; 2] {
    let x = col as f64 + 0.5 * (row % 2) as f64;
    let y = row as f64 * (3.0f64.sqrt() / 2.0);
    [x, y]
}

/// One lattice neuron: a labeled reference vector at a fixed position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomNeuron {
    pub m: Vec<f64>,
    pub label: usize,
    pub location: [f64; 2],
}

/// A rows x cols hexagonal lattice of labeled neurons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomLattice {
    neurons: Vec<SomNeuron>,
    rows: usize,
    cols: usize,
}

impl SomLattice {
    /// Seeds a lattice from class-stratified training samples: neuron i
    /// takes the i-th sampled row and its label, filling the grid
    /// row-major. Labels stay fixed for the lattice's lifetime.
    pub fn init(
        rows: usize,
        cols: usize,
        data: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        seed: u64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param("rows", "lattice must be non-empty"));
        }
        if data.len() != labels.len() {
            return Err(Error::param(
                "labels",
                format!("{} labels for {} rows", labels.len(), data.len()),
            ));
        }
        let picked = stratified_sample(labels, n_classes, rows * cols, seed)?;
        let neurons = picked
            .into_iter()
            .enumerate()
            .map(|(i, idx)| SomNeuron {
                m: data[idx].clone(),
                label: labels[idx],
                location: hex_location(i / cols, i % cols),
            })
            .collect();
        Ok(Self { neurons, rows, cols })
    }

    #[cfg(test)]
    pub(crate) fn from_neurons(neurons: Vec<SomNeuron>, rows: usize, cols: usize) -> Self {
        assert_eq!(neurons.len(), rows * cols);
        Self { neurons, rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn neurons(&self) -> &[SomNeuron] {
        &self.neurons
    }

    /// Index of the neuron whose reference vector is nearest to `x` in
    /// feature space; ties break toward the lowest index.
    pub fn best_matching_unit(&self, x: &[f64]) -> usize {
        assert!(!self.neurons.is_empty(), "best_matching_unit on an empty lattice");
        let mut best = 0;
        let mut best_d = squared_distance(&self.neurons[0].m, x);
        for (i, n) in self.neurons.iter().enumerate().skip(1) {
            let d = squared_distance(&n.m, x);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Label of the best-matching unit.
    pub fn predict(&self, x: &[f64]) -> usize {
        self.neurons[self.best_matching_unit(x)].label
    }

    /// Feature dimension of the reference vectors.
    pub fn input_dim(&self) -> usize {
        self.neurons.first().map_or(0, |n| n.m.len())
    }

    /// Checks structural invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.neurons.is_empty() || self.neurons.len() != self.rows * self.cols {
            return Err(Error::ModelFormat("lattice shape does not match neuron count".into()));
        }
        let dim = self.neurons[0].m.len();
        for n in &self.neurons {
            if n.m.len() != dim {
                return Err(Error::ModelFormat("lattice dimensions disagree".into()));
            }
        }
        for (i, a) in self.neurons.iter().enumerate() {
            for b in &self.neurons[i + 1..] {
                if a.location == b.location {
                    return Err(Error::ModelFormat("duplicate lattice locations".into()));
                }
            }
        }
        Ok(())
    }
}

/// Gaussian neighborhood weight between the winner's location and another
/// neuron's: alpha * exp(-||lc - li||^2 / (2 sigma^2)). Maximal (= alpha)
/// at the winner itself and strictly decreasing with lattice distance.
pub fn som_neighborhood(loc_c: [f64; 2], loc_i: [f64; 2], alpha: f64, sigma: f64) -> f64 {
    assert!(sigma > 0.0, "neighborhood width must be positive");
    let d2 = (loc_c[0] - loc_i[0]).powi(2) + (loc_c[1] - loc_i[1]).powi(2);
    alpha * (-d2 / (2.0 * sigma * sigma)).exp()
}

/// One supervised training step: every neuron within the winner's
/// neighborhood moves by its kernel weight, toward `x` when its label
/// matches the sample's and away otherwise. Neurons whose kernel weight
/// falls below `SOM_KERNEL_CUTOFF * alpha` are skipped untouched.
/// Returns the winner's index.
pub fn som_train_step(
    lattice: &mut SomLattice,
    x: &[f64],
    label: usize,
    alpha: f64,
    sigma: f64,
) -> usize {
    assert!(sigma > 0.0, "neighborhood width must be positive");
    let winner = lattice.best_matching_unit(x);
    let center = lattice.neurons[winner].location;
    for neuron in &mut lattice.neurons {
        let d2 = (center[0] - neuron.location[0]).powi(2)
            + (center[1] - neuron.location[1]).powi(2);
        let kernel = (-d2 / (2.0 * sigma * sigma)).exp();
        if kernel < SOM_KERNEL_CUTOFF {
            continue;
        }
        let h = if neuron.label == label { alpha * kernel } else { -alpha * kernel };
        for (m, &xi) in neuron.m.iter_mut().zip(x) {
            *m += h * (xi - *m);
        }
    }
    winner
}
