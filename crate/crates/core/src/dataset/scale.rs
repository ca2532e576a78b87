//! Per-column min-max scaling into `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::dataset::FlowDataset;
use crate::error::{Error, Result};

/// Linear rescaling of each feature column to `[0, 1]`, fitted on one
/// dataset and applied to any rows with the same columns. Values outside
/// the fitted range clamp to the interval edge, and constant columns map
/// to 0 so they carry no signal either way.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MinMaxScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
    /// How many rows the fit saw. Exists so tests can verify that scalers
    /// used inside cross-validation never saw test rows.
    fitted_rows: usize,
}

impl MinMaxScaler {
    /// Computes per-column minima and maxima. Non-finite values are ignored
    /// (a column with no finite values degrades to constant). Fitting an
    /// empty dataset is an error.
    pub fn fit(dataset: &FlowDataset) -> Result<MinMaxScaler> {
        if dataset.is_empty() {
            return Err(Error::empty("cannot fit a scaler on no rows"));
        }
        let n = dataset.n_features();
        let mut mins = vec![f64::INFINITY; n];
        let mut maxs = vec![f64::NEG_INFINITY; n];
        for r in &dataset.records {
            for (i, &v) in r.features.iter().enumerate() {
                if !v.is_finite() {
                    continue;
                }
                if v < mins[i] {
                    mins[i] = v;
                }
                if v > maxs[i] {
                    maxs[i] = v;
                }
            }
        }
        let constant = dataset
            .feature_names
            .iter()
            .zip(mins.iter().zip(&maxs))
            .filter(|(_, (lo, hi))| lo >= hi)
            .map(|(name, _)| name.as_str())
            .collect::<Vec<_>>();
        if !constant.is_empty() {
            log::warn!(
                "{} constant feature column(s) will scale to 0: {}",
                constant.len(),
                constant.join(", ")
            );
        }
        Ok(MinMaxScaler {
            mins,
            maxs,
            fitted_rows: dataset.len(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.mins.len()
    }

    pub fn fitted_rows(&self) -> usize {
        self.fitted_rows
    }

    /// Scales one row in place.
    pub fn transform_row(&self, row: &mut [f64]) -> Result<()> {
        if row.len() != self.mins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mins.len(),
                found: row.len(),
            });
        }
        for (i, v) in row.iter_mut().enumerate() {
            let (lo, hi) = (self.mins[i], self.maxs[i]);
            *v = if lo < hi {
                ((*v - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
        Ok(())
    }

    /// Scales every row of a dataset in place.
    pub fn transform(&self, dataset: &mut FlowDataset) -> Result<()> {
        for r in &mut dataset.records {
            self.transform_row(&mut r.features)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FlowRecord;

    fn dataset(rows: &[&[f64]]) -> FlowDataset {
        let n = rows.first().map_or(0, |f| f.len());
        FlowDataset {
            feature_names: (0..n).map(|i| format!("f{i}")).collect(),
            records: rows
                .iter()
                .map(|f| FlowRecord {
                    features: f.to_vec(),
                    label: 0,
                })
                .collect(),
            label_vocab: vec!["x".into()],
        }
    }

    #[test]
    fn scales_fitted_range_onto_unit_interval() {
        let mut ds = dataset(&[&[0.0, 10.0], &[5.0, 20.0], &[10.0, 30.0]]);
        let scaler = MinMaxScaler::fit(&ds).unwrap();
        assert_eq!(scaler.fitted_rows(), 3);
        scaler.transform(&mut ds).unwrap();
        assert_eq!(ds.records[0].features, [0.0, 0.0]);
        assert_eq!(ds.records[1].features, [0.5, 0.5]);
        assert_eq!(ds.records[2].features, [1.0, 1.0]);
    }

    #[test]
    fn out_of_range_values_clamp() {
        let ds = dataset(&[&[0.0], &[10.0]]);
        let scaler = MinMaxScaler::fit(&ds).unwrap();
        let mut row = [-5.0];
        scaler.transform_row(&mut row).unwrap();
        assert_eq!(row, [0.0]);
        let mut row = [25.0];
        scaler.transform_row(&mut row).unwrap();
        assert_eq!(row, [1.0]);
    }

    #[test]
    fn constant_columns_map_to_zero() {
        let ds = dataset(&[&[7.0, 1.0], &[7.0, 2.0]]);
        let scaler = MinMaxScaler::fit(&ds).unwrap();
        let mut row = [7.0, 1.5];
        scaler.transform_row(&mut row).unwrap();
        assert_eq!(row, [0.0, 0.5]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let ds = dataset(&[&[1.0, 2.0]]);
        let scaler = MinMaxScaler::fit(&ds).unwrap();
        let mut row = [1.0];
        assert!(scaler.transform_row(&mut row).is_err());
    }
}
