use alloc::vec::Vec;

use rand::Rng;

use super::{check, roc::roc_auc, EvalError};
use crate::seed;

pub const DEFAULT_BOOTSTRAP: usize = 5000;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BootstrapSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub stdev: f64,
    /// 2.5th percentile of the resampled AUCs.
    pub ci_low: f64,
    /// 97.5th percentile of the resampled AUCs.
    pub ci_high: f64,
    /// Resampled AUCs in iteration order.
    pub samples: Vec<f64>,
}

/// Percentile of sorted data with linear interpolation between order
/// statistics (`q` in `[0, 1]`).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// AUC over `n` resamples with replacement. Resample `i` draws from its own
/// generator seeded by `(seed, i)`; a resample holding a single class is
/// redrawn from the same generator.
pub fn bootstrap_auc(scores: &[f64], labels: &[bool], n: usize, seed: u64) -> Result<BootstrapSummary, EvalError> {
    check(scores, labels)?;
    if n == 0 {
        return Err(EvalError::NoResamples);
    }
    let m = scores.len();
    let mut s = Vec::with_capacity(m);
    let mut l = Vec::with_capacity(m);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = seed::rng(seed::derive_indexed(seed, "bootstrap", i as u64));
        loop {
            s.clear();
            l.clear();
            for _ in 0..m {
                let k = rng.gen_range(0..m);
                s.push(scores[k]);
                l.push(labels[k]);
            }
            let pos = l.iter().filter(|&&b| b).count();
            if pos > 0 && pos < m {
                break;
            }
        }
        samples.push(roc_auc(&s, &l)?);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let stdev = if n > 1 {
        libm::sqrt(samples.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1) as f64)
    } else {
        0.0
    };
    let mut sorted = samples.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(BootstrapSummary {
        n,
        mean,
        stdev,
        ci_low: percentile(&sorted, 0.025),
        ci_high: percentile(&sorted, 0.975),
        samples,
    })
}
