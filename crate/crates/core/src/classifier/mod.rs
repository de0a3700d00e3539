//! Second-order gradient-boosted regression trees on the logistic loss.
//!
//! Each round fits one tree to the gradients `g = p - y` and hessians
//! `h = p(1 - p)` of the current model, with positive rows weighted by
//! `scale_pos_weight`. Splits are found by an exact greedy scan; a split at a
//! node with gradient and hessian sums `(G, H)` split into `(G_L, H_L)` and
//! `(G_R, H_R)` scores
//!
//! ```text
//! gain = ½ [S(G_L, H_L) + S(G_R, H_R) - S(G, H)] - γ,   S(G, H) = T(G)² / (H + λ)
//! ```
//!
//! where `T` soft-thresholds by `α`. Leaves hold `-T(G) / (H + λ)` scaled by
//! the learning rate.

mod importance;
mod train;
mod tree;
mod tune;

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub use importance::{feature_importance, FeatureImportance, ImportanceEntry};
pub use train::{log_loss, sigmoid, train, train_with_history, GbtModel};
pub use tree::{Node, Tree};
pub use tune::{
    final_config, stratified_split, tune, FixedCandidates, RandomSearch, Sampler, SearchSpace, Trial, TuneOptions,
    TuneResult,
};

/// Values of `reg_alpha` explored by the tuner.
pub const REG_ALPHA_CHOICES: [f64; 19] = [
    1e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 0.1, 0.5, 0.7, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 80.0, 100.0,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GbtError {
    #[error("empty table")]
    Empty,
    #[error("labels hold a single class")]
    SingleClass,
    #[error("non-finite feature value at row {row}, feature {feature}")]
    NonFinite { row: usize, feature: usize },
    #[error("row {row} has {got} features, expected {expected}")]
    Dimension { row: usize, expected: usize, got: usize },
    #[error("{0} rows but {1} labels")]
    LabelCount(usize, usize),
    #[error("{0} feature names for {1} features")]
    NameCount(usize, usize),
    #[error("config field {field} = {value} outside its range")]
    BadConfig { field: &'static str, value: f64 },
    #[error("validation split lacks a class after {0} attempts")]
    Split(usize),
    #[error("tuning budget must be at least one")]
    NoBudget,
}

/// Boosting hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GbtConfig {
    pub max_depth: usize,
    pub gamma: f64,
    pub reg_alpha: f64,
    pub reg_lambda: f64,
    pub colsample_bytree: f64,
    pub min_child_weight: f64,
    pub subsample: f64,
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub scale_pos_weight: f64,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            max_depth: 6,
            gamma: 0.0,
            reg_alpha: 1e-5,
            reg_lambda: 1.0,
            colsample_bytree: 1.0,
            min_child_weight: 1.0,
            subsample: 1.0,
            n_estimators: 180,
            learning_rate: 0.3,
            scale_pos_weight: 1.0,
            seed: 0,
        }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<(), GbtError> {
        fn within(field: &'static str, v: f64, lo: f64, hi: f64) -> Result<(), GbtError> {
            if v.is_finite() && v >= lo && v <= hi {
                Ok(())
            } else {
                Err(GbtError::BadConfig { field, value: v })
            }
        }
        within("max_depth", self.max_depth as f64, 1.0, 18.0)?;
        within("gamma", self.gamma, 0.0, 9.0)?;
        within("reg_alpha", self.reg_alpha, 1e-5, 100.0)?;
        within("reg_lambda", self.reg_lambda, 0.0, 1.0)?;
        within("colsample_bytree", self.colsample_bytree, 0.5, 1.0)?;
        within("min_child_weight", self.min_child_weight, 0.0, 10.0)?;
        within("subsample", self.subsample, 0.5, 1.0)?;
        within("learning_rate", self.learning_rate, f64::MIN_POSITIVE, f64::MAX)?;
        within("scale_pos_weight", self.scale_pos_weight, f64::MIN_POSITIVE, f64::MAX)?;
        Ok(())
    }
}

/// Feature rows with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    labels: Vec<bool>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<bool>, feature_names: Vec<String>) -> Result<Self, GbtError> {
        if rows.is_empty() {
            return Err(GbtError::Empty);
        }
        if rows.len() != labels.len() {
            return Err(GbtError::LabelCount(rows.len(), labels.len()));
        }
        let nf = feature_names.len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != nf {
                return Err(GbtError::Dimension {
                    row: r,
                    expected: nf,
                    got: row.len(),
                });
            }
            if let Some(f) = row.iter().position(|v| !v.is_finite()) {
                return Err(GbtError::NonFinite { row: r, feature: f });
            }
        }
        Ok(Self {
            rows,
            labels,
            feature_names,
        })
    }

    /// Dataset with generated names `f0, f1, …`.
    pub fn unnamed(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self, GbtError> {
        let nf = rows.first().map_or(0, Vec::len);
        let names = (0..nf).map(|i| alloc::format!("f{i}")).collect();
        Self::new(rows, labels, names)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Negatives per positive, the usual `scale_pos_weight`.
    pub fn imbalance(&self) -> f64 {
        let pos = self.positives();
        (self.len() - pos) as f64 / pos as f64
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Keeps only the listed feature columns.
    pub fn select_features(&self, columns: &[usize]) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| columns.iter().map(|&c| r[c]).collect())
                .collect(),
            labels: self.labels.clone(),
            feature_names: columns.iter().map(|&c| self.feature_names[c].clone()).collect(),
        }
    }

    pub(crate) fn check_trainable(&self) -> Result<(), GbtError> {
        if self.len() < 2 {
            return Err(GbtError::Empty);
        }
        let pos = self.positives();
        if pos == 0 || pos == self.len() {
            return Err(GbtError::SingleClass);
        }
        Ok(())
    }
}
