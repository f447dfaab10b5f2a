//! Plug-in estimation: bin continuous feature samples, count, normalize.
//!
//! Raw empirical frequencies, no bias correction. Deterministic given the
//! samples and the binning spec.

use super::{InfoError, JointPmf, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinMode {
    EqualWidth,
    EqualFrequency,
}

/// Per-dimension discretization for sampled real-valued features.
#[derive(Debug, Clone)]
pub struct BinningSpec {
    pub mode: BinMode,
    /// Bin count per dimension; each must be at least 1.
    pub bins: Vec<usize>,
}

impl BinningSpec {
    pub fn new(mode: BinMode, bins: Vec<usize>) -> Result<Self> {
        if bins.is_empty() || bins.iter().any(|&b| b == 0) {
            return Err(InfoError::EmptyBinning);
        }
        Ok(BinningSpec { mode, bins })
    }

    /// Same bin count in every one of `dims` dimensions.
    pub fn uniform(mode: BinMode, bins: usize, dims: usize) -> Result<Self> {
        Self::new(mode, vec![bins; dims])
    }
}

/// Normalized frequency table over the binned alphabet of the sample rows.
///
/// Variables are named `v0`, `v1`, ... in column order.
pub fn plugin_pmf_from_samples(samples: &[Vec<f64>], binning: &BinningSpec) -> Result<JointPmf> {
    if samples.is_empty() {
        return Err(InfoError::NoSamples);
    }
    let dims = binning.bins.len();
    for (row, s) in samples.iter().enumerate() {
        if s.len() != dims {
            if row == 0 {
                return Err(InfoError::BinningArityMismatch { spec: dims, got: s.len() });
            }
            return Err(InfoError::ArityMismatch { row, got: s.len(), expected: dims });
        }
        for (col, &v) in s.iter().enumerate() {
            if !v.is_finite() {
                return Err(InfoError::NonFiniteSample { row, col });
            }
        }
    }

    let n = samples.len();
    let mut binned = vec![0usize; n * dims];
    for d in 0..dims {
        let b = binning.bins[d];
        match binning.mode {
            BinMode::EqualWidth => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for s in samples {
                    lo = lo.min(s[d]);
                    hi = hi.max(s[d]);
                }
                let width = hi - lo;
                for (row, s) in samples.iter().enumerate() {
                    let bin = if width == 0.0 {
                        0
                    } else {
                        (((s[d] - lo) / width) * b as f64).min(b as f64 - 1.0) as usize
                    };
                    binned[row * dims + d] = bin;
                }
            }
            BinMode::EqualFrequency => {
                let mut sorted: Vec<f64> = samples.iter().map(|s| s[d]).collect();
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                // Threshold j separates bins j-1 and j; values >= threshold
                // fall into the later bin.
                let thresholds: Vec<f64> =
                    (1..b).map(|j| sorted[(j * n) / b]).collect();
                for (row, s) in samples.iter().enumerate() {
                    let bin = thresholds.iter().take_while(|&&t| s[d] >= t).count();
                    binned[row * dims + d] = bin.min(b - 1);
                }
            }
        }
    }

    let cells: usize = binning.bins.iter().product();
    let mut strides = vec![0usize; dims];
    let mut acc = 1;
    for d in (0..dims).rev() {
        strides[d] = acc;
        acc *= binning.bins[d];
    }
    let mut table = vec![0.0; cells];
    for row in 0..n {
        let mut cell = 0;
        for d in 0..dims {
            cell += binned[row * dims + d] * strides[d];
        }
        table[cell] += 1.0;
    }
    let inv = 1.0 / n as f64;
    for p in &mut table {
        *p *= inv;
    }
    let vars: Vec<(String, usize)> =
        (0..dims).map(|d| (format!("v{d}"), binning.bins[d])).collect();
    JointPmf::new(vars, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::VarSelector;

    #[test]
    fn constant_column_collapses_to_point_mass() {
        let samples = vec![vec![3.5], vec![3.5], vec![3.5]];
        let spec = BinningSpec::uniform(BinMode::EqualWidth, 2, 1).unwrap();
        let pmf = plugin_pmf_from_samples(&samples, &spec).unwrap();
        assert_eq!(pmf.table(), &[1.0, 0.0]);
        assert_eq!(pmf.entropy(&VarSelector::new(vec![0])).unwrap(), 0.0);
    }

    #[test]
    fn integer_coded_samples_with_matching_bins_reproduce_frequencies() {
        let samples = vec![
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![2.0, 2.0],
        ];
        let spec = BinningSpec::new(BinMode::EqualWidth, vec![3, 3]).unwrap();
        let pmf = plugin_pmf_from_samples(&samples, &spec).unwrap();
        // row-major (v0, v1) over 3x3
        let mut expected = vec![0.0; 9];
        expected[1] = 0.5; // (0,1)
        expected[3] = 0.25; // (1,0)
        expected[8] = 0.25; // (2,2)
        assert_eq!(pmf.table(), expected.as_slice());
    }

    #[test]
    fn equal_frequency_splits_ranks() {
        let samples: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let spec = BinningSpec::uniform(BinMode::EqualFrequency, 4, 1).unwrap();
        let pmf = plugin_pmf_from_samples(&samples, &spec).unwrap();
        assert_eq!(pmf.table(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn rejects_empty_and_ragged_and_nonfinite() {
        let spec = BinningSpec::uniform(BinMode::EqualWidth, 2, 1).unwrap();
        assert!(matches!(plugin_pmf_from_samples(&[], &spec), Err(InfoError::NoSamples)));
        let ragged = vec![vec![1.0], vec![1.0, 2.0]];
        assert!(plugin_pmf_from_samples(&ragged, &spec).is_err());
        let bad = vec![vec![f64::NAN]];
        assert!(matches!(
            plugin_pmf_from_samples(&bad, &spec),
            Err(InfoError::NonFiniteSample { .. })
        ));
        assert!(BinningSpec::new(BinMode::EqualWidth, vec![2, 0]).is_err());
    }
}
