//! Fixed-window curvature histograms and the morphomic feature vector.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("histogram needs lo < hi and at least one bin (lo={lo}, hi={hi}, bins={bins})")]
    BadSpec { lo: f64, hi: f64, bins: usize },
    #[error("empty histogram: no value fell inside the window")]
    EmptyHistogram,
    #[error("non-finite curvature value")]
    NonFinite,
}

/// Histogram window and binning.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HistogramSpec {
    pub bin_count: usize,
    pub lo: f64,
    pub hi: f64,
    /// Out-of-window values go to the edge bins instead of being dropped.
    pub clamp_out_of_range: bool,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            bin_count: 10,
            lo: -0.2,
            hi: 0.2,
            clamp_out_of_range: true,
        }
    }
}

impl HistogramSpec {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.bin_count == 0 || !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(FeatureError::BadSpec {
                lo: self.lo,
                hi: self.hi,
                bins: self.bin_count,
            });
        }
        Ok(())
    }

    /// Bin for `v`, or `None` when it is dropped. Bins are right-open except
    /// the last, which includes `hi`.
    pub fn bin_of(&self, v: f64) -> Option<usize> {
        let n = self.bin_count;
        if v < self.lo {
            return self.clamp_out_of_range.then_some(0);
        }
        if v > self.hi {
            return self.clamp_out_of_range.then_some(n - 1);
        }
        let k = libm::floor((v - self.lo) * n as f64 / (self.hi - self.lo));
        Some((k.max(0.0) as usize).min(n - 1))
    }
}

/// Probability mass per bin (sums to one).
pub fn curvature_histogram(values: &[f64], spec: &HistogramSpec) -> Result<Vec<f64>, FeatureError> {
    spec.validate()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite);
    }
    let mut counts = vec![0u64; spec.bin_count];
    let mut total = 0u64;
    for &v in values {
        if let Some(b) = spec.bin_of(v) {
            counts[b] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(FeatureError::EmptyHistogram);
    }
    Ok(counts.into_iter().map(|c| c as f64 / total as f64).collect())
}

/// Histogram bins followed by the mesh energy.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureVector {
    pub bins: Vec<f64>,
    pub energy: f64,
}

impl FeatureVector {
    /// `bin_0 … bin_{n-1}, energy`.
    pub fn names(bin_count: usize) -> Vec<String> {
        let mut names: Vec<String> = (0..bin_count).map(|i| format!("bin_{i}")).collect();
        names.push(String::from("energy"));
        names
    }

    pub fn feature_names(&self) -> Vec<String> {
        Self::names(self.bins.len())
    }

    pub fn to_row(&self) -> Vec<f64> {
        let mut row = self.bins.clone();
        row.push(self.energy);
        row
    }

    /// Mass in the first and last bins.
    pub fn extreme_mass(&self) -> f64 {
        match self.bins.len() {
            0 => 0.0,
            1 => self.bins[0],
            n => self.bins[0] + self.bins[n - 1],
        }
    }

    /// Mass in bins above the window center minus mass below it.
    pub fn positive_bias(&self) -> f64 {
        let n = self.bins.len();
        let pos: f64 = self.bins[n.div_ceil(2)..].iter().sum();
        let neg: f64 = self.bins[..n / 2].iter().sum();
        pos - neg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn zero_is_a_point_mass_in_bin_five() {
        let h = curvature_histogram(&[0.0; 17], &HistogramSpec::default()).unwrap();
        let mut expected = vec![0.0; 10];
        expected[5] = 1.0;
        assert_eq!(h, expected);
    }

    #[test]
    fn out_of_window_values_clamp_to_edges() {
        let h = curvature_histogram(&[-0.3, 0.3], &HistogramSpec::default()).unwrap();
        assert_eq!(h[0], 0.5);
        assert_eq!(h[9], 0.5);
        assert_eq!(h[1..9].iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn dropping_out_of_window_values() {
        let spec = HistogramSpec {
            clamp_out_of_range: false,
            ..HistogramSpec::default()
        };
        let h = curvature_histogram(&[-0.3, 0.3, 0.01], &spec).unwrap();
        assert_eq!(h[5], 1.0);
        assert_eq!(
            curvature_histogram(&[-0.3, 0.3], &spec),
            Err(FeatureError::EmptyHistogram)
        );
    }

    #[test]
    fn last_bin_is_closed_and_edges_are_right_open() {
        let spec = HistogramSpec {
            bin_count: 4,
            lo: 0.0,
            hi: 4.0,
            clamp_out_of_range: false,
        };
        assert_eq!(spec.bin_of(0.0), Some(0));
        assert_eq!(spec.bin_of(1.0), Some(1));
        assert_eq!(spec.bin_of(3.999), Some(3));
        assert_eq!(spec.bin_of(4.0), Some(3));
        assert_eq!(spec.bin_of(4.0001), None);
    }

    #[test]
    fn bad_specs_are_rejected() {
        let spec = HistogramSpec {
            lo: 0.2,
            hi: -0.2,
            ..HistogramSpec::default()
        };
        assert!(matches!(
            curvature_histogram(&[0.0], &spec),
            Err(FeatureError::BadSpec { .. })
        ));
        let spec = HistogramSpec {
            bin_count: 0,
            ..HistogramSpec::default()
        };
        assert!(spec.validate().is_err());
        assert_eq!(
            curvature_histogram(&[f64::NAN], &HistogramSpec::default()),
            Err(FeatureError::NonFinite)
        );
    }

    /// Brute-force binning oracle: walk the explicit bin edges.
    fn brute_bin(v: f64, lo: f64, hi: f64, n: usize) -> usize {
        for k in 0..n {
            let left = lo + (hi - lo) * k as f64 / n as f64;
            let right = lo + (hi - lo) * (k + 1) as f64 / n as f64;
            if v >= left && v < right {
                return k;
            }
        }
        n - 1
    }

    #[test]
    fn uniform_samples_fill_bins_evenly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..10_000).map(|_| rng.gen_range(-0.2..0.2)).collect();
        let h = curvature_histogram(&values, &HistogramSpec::default()).unwrap();
        let mut brute = [0usize; 10];
        for &v in &values {
            brute[brute_bin(v, -0.2, 0.2, 10)] += 1;
        }
        for k in 0..10 {
            assert!((h[k] - 0.1).abs() < 0.01, "bin {k}: {}", h[k]);
            assert!((h[k] - brute[k] as f64 / 1e4).abs() < 2e-4);
        }
    }

    #[test]
    fn names_are_stable() {
        let n = FeatureVector::names(3);
        assert_eq!(n, ["bin_0", "bin_1", "bin_2", "energy"]);
    }

    proptest! {
        #[test]
        fn histogram_mass_is_one(values in proptest::collection::vec(-1.0f64..1.0, 1..300), bins in 1usize..30) {
            let spec = HistogramSpec { bin_count: bins, ..HistogramSpec::default() };
            let h = curvature_histogram(&values, &spec).unwrap();
            prop_assert_eq!(h.len(), bins);
            prop_assert!((h.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(h.iter().all(|&b| (0.0..=1.0).contains(&b)));
        }
    }
}
