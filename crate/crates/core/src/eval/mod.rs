//! Evaluation statistics: ROC AUC, the Youden operating point, percentile
//! bootstrap of the AUC and Welch's unequal-variance t-test.

mod bootstrap;
mod roc;
mod special;
mod welch;

use alloc::vec::Vec;

use thiserror::Error;

pub use bootstrap::{bootstrap_auc, percentile, BootstrapSummary, DEFAULT_BOOTSTRAP};
pub use roc::{roc_auc, roc_points, youden_point, RocPoint, YoudenPoint};
pub use special::{ln_gamma, regularized_incomplete_beta, student_t_two_sided};
pub use welch::{welch_test, WelchResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("both classes must be present")]
    SingleClass,
    #[error("non-finite score")]
    NonFinite,
    #[error("each sample needs at least two values (got {0} and {1})")]
    SampleTooSmall(usize, usize),
    #[error("both samples have zero variance and different means")]
    ZeroVariance,
    #[error("bootstrap needs at least one resample")]
    NoResamples,
}

/// Summary of a scored, labeled test set.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub n_positive: usize,
    pub auc: f64,
    pub threshold: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub accuracy: f64,
    pub bootstrap: BootstrapSummary,
    pub roc_points: Vec<RocPoint>,
}

/// AUC, Youden point, bootstrap and ROC curve in one pass.
pub fn evaluate(scores: &[f64], labels: &[bool], n_bootstrap: usize, seed: u64) -> Result<EvalReport, EvalError> {
    let auc = roc_auc(scores, labels)?;
    let y = youden_point(scores, labels)?;
    let bootstrap = bootstrap_auc(scores, labels, n_bootstrap, seed)?;
    Ok(EvalReport {
        n: scores.len(),
        n_positive: labels.iter().filter(|&&l| l).count(),
        auc,
        threshold: y.threshold,
        sensitivity: y.sensitivity,
        specificity: y.specificity,
        accuracy: y.accuracy,
        bootstrap,
        roc_points: roc_points(scores, labels)?,
    })
}

fn check(scores: &[f64], labels: &[bool]) -> Result<(usize, usize), EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    Ok((pos, neg))
}
