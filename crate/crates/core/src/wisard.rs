//! WiSARD weightless neural network.
//!
//! A WiSARD model keeps one discriminator per class. Each discriminator is
//! a bank of RAM neurons: a RAM holds one bit per addressable cell, the
//! address is formed from a fixed pseudo-random tuple of retina bits, and
//! training writes 1 into the addressed cell of every RAM. The response of
//! a discriminator to a pattern is the fraction of its RAMs whose addressed
//! cell is set, and classification picks the class with the highest
//! response.
//!
//! Real-valued flow features enter the retina through thermometer encoding,
//! so rows must be scaled to [0, 1] before training or classification.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::argmax;
use crate::rng::{rng_for, Stream};

/// Thermometer resolution used by the standard flow classifier.
pub const DEFAULT_BITS_PER_FEATURE: usize = 16;
/// Address width of one RAM neuron used by the standard flow classifier.
pub const DEFAULT_TUPLE_BITS: usize = 8;
/// Row-chunk size used for progress reporting during bulk training.
pub const DEFAULT_CHUNK_SIZE: usize = 100;

/// Address widths above this would allocate RAMs too large to be useful
/// for flow features (2^16 cells is already 8 KiB per neuron).
const MAX_TUPLE_BITS: usize = 16;

/// Retina geometry: how a scaled feature row maps onto binary inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetinaConfig {
    n_features: usize,
    bits_per_feature: usize,
}

impl RetinaConfig {
    pub fn new(n_features: usize, bits_per_feature: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::param("n_features", "must be at least 1"));
        }
        if bits_per_feature == 0 {
            return Err(Error::param("bits_per_feature", "must be at least 1"));
        }
        Ok(Self { n_features, bits_per_feature })
    }

    /// Standard resolution: 16 thermometer bits per feature.
    pub fn standard(n_features: usize) -> Result<Self> {
        Self::new(n_features, DEFAULT_BITS_PER_FEATURE)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn bits_per_feature(&self) -> usize {
        self.bits_per_feature
    }

    /// Total number of binary inputs before tuple padding.
    pub fn retina_size(&self) -> usize {
        self.n_features * self.bits_per_feature
    }
}

/// Thermometer-encodes a scaled feature row into retina bits.
///
/// A feature with value `v` and resolution `B` lights the first
/// `floor(v * B)` of its `B` bits; values outside [0, 1] are clamped first.
/// Per-feature blocks are concatenated in row order. The code is monotone:
/// raising a feature value never clears a lit bit.
pub fn thermometer_encode(row: &[f64], cfg: &RetinaConfig) -> Result<Vec<bool>> {
    let mut bits = Vec::with_capacity(cfg.retina_size());
    thermometer_encode_into(row, cfg, &mut bits)?;
    Ok(bits)
}

/// In-place variant of [`thermometer_encode`] for reuse across many rows.
pub fn thermometer_encode_into(
    row: &[f64],
    cfg: &RetinaConfig,
    bits: &mut Vec<bool>,
) -> Result<()> {
    if row.len() != cfg.n_features {
        return Err(Error::DimensionMismatch { expected: cfg.n_features, found: row.len() });
    }
    bits.clear();
    let b = cfg.bits_per_feature;
    for &v in row {
        let lit = ((v.clamp(0.0, 1.0) * b as f64).floor() as usize).min(b);
        for i in 0..b {
            bits.push(i < lit);
        }
    }
    Ok(())
}

/// Fixed pseudo-random partition of retina bits into RAM address tuples.
///
/// The retina is zero-padded up to a multiple of the tuple width, the
/// padded index range is shuffled once from a seed, and each consecutive
/// group of `tuple_bits` shuffled indices feeds one RAM. Bit `j` of a
/// tuple becomes bit `j` of the RAM address. One mapping is shared by all
/// discriminators of a model so responses are comparable across classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleMapping {
    order: Vec<usize>,
    tuple_bits: usize,
    retina_size: usize,
}

impl TupleMapping {
    pub fn new(retina_size: usize, tuple_bits: usize, seed: u64) -> Result<Self> {
        if retina_size == 0 {
            return Err(Error::param("retina_size", "must be at least 1"));
        }
        if tuple_bits == 0 || tuple_bits > MAX_TUPLE_BITS {
            return Err(Error::param(
                "tuple_bits",
                format!("must be in 1..={MAX_TUPLE_BITS}"),
            ));
        }
        let padded = retina_size.div_ceil(tuple_bits) * tuple_bits;
        let mut order: Vec<usize> = (0..padded).collect();
        order.shuffle(&mut rng_for(seed, Stream::TupleMapping));
        Ok(Self { order, tuple_bits, retina_size })
    }

    /// Builds a mapping from an explicit bit order. Test hook for cases
    /// where the address layout must be known exactly.
    #[cfg(test)]
    pub(crate) fn with_order(order: Vec<usize>, tuple_bits: usize, retina_size: usize) -> Self {
        let mapping = Self { order, tuple_bits, retina_size };
        mapping.validate().expect("test mapping must be valid");
        mapping
    }

    /// Number of RAM neurons fed by this mapping.
    pub fn n_rams(&self) -> usize {
        self.order.len() / self.tuple_bits
    }

    pub fn tuple_bits(&self) -> usize {
        self.tuple_bits
    }

    pub fn retina_size(&self) -> usize {
        self.retina_size
    }

    /// Number of addressable cells in each RAM.
    pub fn ram_cells(&self) -> usize {
        1 << self.tuple_bits
    }

    /// The shuffled bit order; indices at or beyond `retina_size` are
    /// constant-zero padding bits.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Computes one RAM address per tuple, least significant bit first:
    /// the j-th index of a tuple contributes bit j of the address.
    /// Padding bits always read 0.
    pub fn addresses_into(&self, pattern: &[bool], out: &mut Vec<usize>) -> Result<()> {
        if pattern.len() != self.retina_size {
            return Err(Error::DimensionMismatch {
                expected: self.retina_size,
                found: pattern.len(),
            });
        }
        out.clear();
        for tuple in self.order.chunks_exact(self.tuple_bits) {
            let mut address = 0usize;
            for (j, &idx) in tuple.iter().enumerate() {
                if idx < self.retina_size && pattern[idx] {
                    address |= 1 << j;
                }
            }
            out.push(address);
        }
        Ok(())
    }

    pub fn addresses(&self, pattern: &[bool]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(self.n_rams());
        self.addresses_into(pattern, &mut out)?;
        Ok(out)
    }

    /// Checks the structural invariants: the order is a bijection over the
    /// padded index range and the range is a whole number of tuples.
    pub fn validate(&self) -> Result<()> {
        if self.tuple_bits == 0 || self.tuple_bits > MAX_TUPLE_BITS {
            return Err(Error::ModelFormat("tuple width out of range".into()));
        }
        let expected = self.retina_size.div_ceil(self.tuple_bits) * self.tuple_bits;
        if self.order.len() != expected {
            return Err(Error::ModelFormat(format!(
                "bit order has {} entries, expected {expected}",
                self.order.len()
            )));
        }
        let mut sorted = self.order.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::ModelFormat(
                "bit order is not a permutation of the padded retina".into(),
            ));
        }
        Ok(())
    }
}

/// One RAM neuron: a single bit per addressable cell, packed into words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct RamNeuron {
    words: Vec<u64>,
    cells: usize,
}

impl RamNeuron {
    fn new(cells: usize) -> Self {
        Self { words: vec![0; cells.div_ceil(64)], cells }
    }

    fn get(&self, address: usize) -> bool {
        (self.words[address / 64] >> (address % 64)) & 1 == 1
    }

    fn set(&mut self, address: usize) {
        self.words[address / 64] |= 1 << (address % 64);
    }
}

/// Per-class bank of RAM neurons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discriminator {
    rams: Vec<RamNeuron>,
}

impl Discriminator {
    fn new(n_rams: usize, cells: usize) -> Self {
        Self { rams: vec![RamNeuron::new(cells); n_rams] }
    }

    pub fn n_rams(&self) -> usize {
        self.rams.len()
    }

    /// Writes 1 into the addressed cell of every RAM; already-set cells
    /// are unchanged, so training is idempotent and order-invariant.
    fn train(&mut self, addresses: &[usize]) {
        debug_assert_eq!(addresses.len(), self.rams.len());
        for (ram, &address) in self.rams.iter_mut().zip(addresses) {
            ram.set(address);
        }
    }

    /// Fraction of RAMs whose addressed cell is set, in [0, 1].
    pub fn response(&self, addresses: &[usize]) -> f64 {
        debug_assert_eq!(addresses.len(), self.rams.len());
        let hits = self
            .rams
            .iter()
            .zip(addresses)
            .filter(|(ram, &address)| ram.get(address))
            .count();
        hits as f64 / self.rams.len() as f64
    }

    fn validate(&self, n_rams: usize, cells: usize) -> Result<()> {
        if self.rams.len() != n_rams {
            return Err(Error::ModelFormat(format!(
                "discriminator has {} RAMs, expected {n_rams}",
                self.rams.len()
            )));
        }
        for ram in &self.rams {
            if ram.cells != cells || ram.words.len() != cells.div_ceil(64) {
                return Err(Error::ModelFormat("RAM cell count mismatch".into()));
            }
        }
        Ok(())
    }
}

/// WiSARD classifier: thermometer retina, one shared tuple mapping, one
/// discriminator per class.
///
/// Classification goes through `&self` only, so a trained model can be
/// shared across threads freely; training requires exclusive access.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WisardModel {
    retina: RetinaConfig,
    mapping: TupleMapping,
    discriminators: Vec<Discriminator>,
    seed: u64,
}

impl WisardModel {
    pub fn new(
        n_features: usize,
        n_classes: usize,
        bits_per_feature: usize,
        tuple_bits: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_classes == 0 {
            return Err(Error::param("n_classes", "must be at least 1"));
        }
        let retina = RetinaConfig::new(n_features, bits_per_feature)?;
        let mapping = TupleMapping::new(retina.retina_size(), tuple_bits, seed)?;
        let discriminators =
            vec![Discriminator::new(mapping.n_rams(), mapping.ram_cells()); n_classes];
        Ok(Self { retina, mapping, discriminators, seed })
    }

    /// Standard flow classifier: 16 bits per feature, 8-bit RAM addresses.
    pub fn standard(n_features: usize, n_classes: usize, seed: u64) -> Result<Self> {
        Self::new(n_features, n_classes, DEFAULT_BITS_PER_FEATURE, DEFAULT_TUPLE_BITS, seed)
    }

    pub fn retina(&self) -> &RetinaConfig {
        &self.retina
    }

    pub fn mapping(&self) -> &TupleMapping {
        &self.mapping
    }

    pub fn n_classes(&self) -> usize {
        self.discriminators.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.discriminators.len() {
            return Err(Error::param(
                "class",
                format!("index {class} out of range for {} classes", self.discriminators.len()),
            ));
        }
        Ok(())
    }

    fn train_addressed(&mut self, addresses: &[usize], class: usize) -> Result<()> {
        self.check_class(class)?;
        self.discriminators[class].train(addresses);
        Ok(())
    }

    /// Trains one binary pattern into the discriminator of `class`.
    pub fn train_pattern(&mut self, pattern: &[bool], class: usize) -> Result<()> {
        let addresses = self.mapping.addresses(pattern)?;
        self.train_addressed(&addresses, class)
    }

    /// Encodes and trains one scaled feature row.
    pub fn train_row(&mut self, row: &[f64], class: usize) -> Result<()> {
        let bits = thermometer_encode(row, &self.retina)?;
        self.train_pattern(&bits, class)
    }

    /// Trains on every row. `chunk_size` paces progress logging only; the
    /// resulting model is identical for any chunking or row order because
    /// cell writes are idempotent.
    pub fn train_rows(&mut self, rows: &[Vec<f64>], labels: &[usize], chunk_size: usize) -> Result<()> {
        if rows.len() != labels.len() {
            return Err(Error::param(
                "labels",
                format!("{} labels for {} rows", labels.len(), rows.len()),
            ));
        }
        if chunk_size == 0 {
            return Err(Error::param("chunk_size", "must be at least 1"));
        }
        let mut bits = Vec::with_capacity(self.retina.retina_size());
        let mut addresses = Vec::with_capacity(self.mapping.n_rams());
        let mut done = 0usize;
        for (chunk_rows, chunk_labels) in rows.chunks(chunk_size).zip(labels.chunks(chunk_size)) {
            for (row, &class) in chunk_rows.iter().zip(chunk_labels) {
                thermometer_encode_into(row, &self.retina, &mut bits)?;
                self.mapping.addresses_into(&bits, &mut addresses)?;
                self.train_addressed(&addresses, class)?;
            }
            done += chunk_rows.len();
            log::debug!("wisard: trained {done} / {} rows", rows.len());
        }
        Ok(())
    }

    /// Response of one class discriminator to a binary pattern.
    pub fn response(&self, pattern: &[bool], class: usize) -> Result<f64> {
        self.check_class(class)?;
        let addresses = self.mapping.addresses(pattern)?;
        Ok(self.discriminators[class].response(&addresses))
    }

    /// Classifies a binary pattern: the winning class index and the full
    /// per-class response vector. Ties go to the lowest class index.
    pub fn classify_pattern(&self, pattern: &[bool]) -> Result<(usize, Vec<f64>)> {
        let addresses = self.mapping.addresses(pattern)?;
        let responses: Vec<f64> =
            self.discriminators.iter().map(|d| d.response(&addresses)).collect();
        Ok((argmax(&responses), responses))
    }

    /// Encodes and classifies one scaled feature row.
    pub fn classify_row(&self, row: &[f64]) -> Result<(usize, Vec<f64>)> {
        let bits = thermometer_encode(row, &self.retina)?;
        self.classify_pattern(&bits)
    }

    /// Winning class only, for bulk prediction loops.
    pub fn predict_row(&self, row: &[f64]) -> Result<usize> {
        Ok(self.classify_row(row)?.0)
    }

    /// Checks structural invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.discriminators.is_empty() {
            return Err(Error::ModelFormat("model has no discriminators".into()));
        }
        if self.mapping.retina_size() != self.retina.retina_size() {
            return Err(Error::ModelFormat("mapping does not match retina size".into()));
        }
        self.mapping.validate()?;
        for d in &self.discriminators {
            d.validate(self.mapping.n_rams(), self.mapping.ram_cells())?;
        }
        Ok(())
    }
}
