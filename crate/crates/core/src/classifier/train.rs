use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use super::tree::{build_tree, GradPair, TreeParams};
use super::{Dataset, GbtConfig, GbtError, Tree};
use crate::seed;

/// Trained additive model. Predictions are `sigmoid(base_score + Σ trees)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub feature_names: Vec<String>,
    pub config: GbtConfig,
    pub trees: Vec<Tree>,
}

pub fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + libm::exp(-m))
    } else {
        let e = libm::exp(m);
        e / (1.0 + e)
    }
}

/// Mean negative log-likelihood, with probabilities clipped away from 0 and 1.
pub fn log_loss(probs: &[f64], labels: &[bool]) -> f64 {
    const EPS: f64 = 1e-15;
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(EPS, 1.0 - EPS);
            if y {
                -libm::log(p)
            } else {
                -libm::log(1.0 - p)
            }
        })
        .sum();
    total / probs.len() as f64
}

impl GbtModel {
    /// A model with no trees.
    pub fn constant(base_score: f64, feature_names: Vec<String>, config: GbtConfig) -> Self {
        Self {
            base_score,
            learning_rate: config.learning_rate,
            feature_names,
            config,
            trees: Vec::new(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    fn check_row(&self, row: &[f64]) -> Result<(), GbtError> {
        if row.len() != self.n_features() {
            return Err(GbtError::Dimension {
                row: 0,
                expected: self.n_features(),
                got: row.len(),
            });
        }
        if let Some(f) = row.iter().position(|v| !v.is_finite()) {
            return Err(GbtError::NonFinite { row: 0, feature: f });
        }
        Ok(())
    }

    /// Raw log-odds.
    pub fn margin(&self, row: &[f64]) -> Result<f64, GbtError> {
        self.check_row(row)?;
        Ok(self.margin_unchecked(row))
    }

    fn margin_unchecked(&self, row: &[f64]) -> f64 {
        self.trees.iter().fold(self.base_score, |m, t| m + t.predict(row))
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<f64, GbtError> {
        self.margin(row).map(sigmoid)
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, GbtError> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| {
                self.predict_proba(r).map_err(|e| match e {
                    GbtError::Dimension { expected, got, .. } => GbtError::Dimension { row: i, expected, got },
                    GbtError::NonFinite { feature, .. } => GbtError::NonFinite { row: i, feature },
                    other => other,
                })
            })
            .collect()
    }
}

pub fn train(data: &Dataset, config: &GbtConfig) -> Result<GbtModel, GbtError> {
    train_with_history(data, config).map(|(m, _)| m)
}

/// Trains and also returns the weighted training log-loss after each round.
pub fn train_with_history(data: &Dataset, config: &GbtConfig) -> Result<(GbtModel, Vec<f64>), GbtError> {
    config.validate()?;
    data.check_trainable()?;
    let x = data.rows();
    let y = data.labels();
    let n = data.len();
    let nf = data.n_features();
    let spw = config.scale_pos_weight;
    let weight = |label: bool| if label { spw } else { 1.0 };

    let pos_w = data.positives() as f64 * spw;
    let neg_w = (n - data.positives()) as f64;
    let base_score = libm::log(pos_w / neg_w);

    let params = TreeParams {
        max_depth: config.max_depth,
        gamma: config.gamma,
        alpha: config.reg_alpha,
        lambda: config.reg_lambda,
        min_child_weight: config.min_child_weight,
        learning_rate: config.learning_rate,
    };
    let n_cols = ((config.colsample_bytree * nf as f64) as usize).clamp(1, nf.max(1));

    let mut model = GbtModel::constant(base_score, data.feature_names().to_vec(), *config);
    let mut margins = alloc::vec![base_score; n];
    let mut grads = alloc::vec![GradPair { g: 0.0, h: 0.0 }; n];
    let mut history = Vec::with_capacity(config.n_estimators);
    let weighted_loss = |margins: &[f64]| {
        let mut total = 0.0;
        let mut wsum = 0.0;
        for (&m, &label) in margins.iter().zip(y) {
            let w = weight(label);
            // log(1 + e^{-m}) for positives, log(1 + e^{m}) for negatives.
            let z = if label { -m } else { m };
            let l = if z > 0.0 {
                z + libm::log1p(libm::exp(-z))
            } else {
                libm::log1p(libm::exp(z))
            };
            total += w * l;
            wsum += w;
        }
        total / wsum
    };

    for t in 0..config.n_estimators {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            let w = weight(y[i]);
            let target = if y[i] { 1.0 } else { 0.0 };
            grads[i] = GradPair {
                g: w * (p - target),
                h: w * p * (1.0 - p),
            };
        }
        let mut rng = seed::rng(seed::derive_indexed(config.seed, "gbt/tree", t as u64));
        let rows: Vec<usize> = if config.subsample >= 1.0 {
            (0..n).collect()
        } else {
            (0..n).filter(|_| rng.gen::<f64>() < config.subsample).collect()
        };
        let mut cols: Vec<usize> = if n_cols >= nf {
            (0..nf).collect()
        } else {
            index::sample(&mut rng, nf, n_cols).into_vec()
        };
        cols.sort_unstable();
        let tree = if rows.is_empty() {
            Tree::leaf(0.0)
        } else {
            build_tree(x, &grads, rows, &cols, &params)
        };
        for (m, row) in margins.iter_mut().zip(x) {
            *m += tree.predict(row);
        }
        model.trees.push(tree);
        history.push(weighted_loss(&margins));
    }
    Ok((model, history))
}
