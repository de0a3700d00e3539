//! Hyperparameter search on a stratified train/validation split.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{log_loss, train, Dataset, GbtConfig, GbtError, REG_ALPHA_CHOICES};
use crate::seed;

/// Ranges explored by the tuner. Real ranges are closed intervals.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SearchSpace {
    pub max_depth: (usize, usize),
    pub gamma: (f64, f64),
    pub reg_alpha: Vec<f64>,
    pub reg_lambda: (f64, f64),
    pub colsample_bytree: (f64, f64),
    pub min_child_weight: (f64, f64),
    pub subsample: (f64, f64),
    /// Rounds used while tuning.
    pub n_estimators: usize,
    /// Learning rate used while tuning.
    pub learning_rate: f64,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            max_depth: (3, 18),
            gamma: (0.0, 9.0),
            reg_alpha: REG_ALPHA_CHOICES.to_vec(),
            reg_lambda: (0.0, 1.0),
            colsample_bytree: (0.5, 1.0),
            min_child_weight: (0.0, 10.0),
            subsample: (0.5, 1.0),
            n_estimators: 180,
            learning_rate: 0.3,
        }
    }
}

impl SearchSpace {
    /// Draws one configuration uniformly from the space.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> GbtConfig {
        let mut real = |(lo, hi): (f64, f64)| if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        let gamma = real(self.gamma);
        let reg_lambda = real(self.reg_lambda);
        let colsample_bytree = real(self.colsample_bytree);
        let min_child_weight = real(self.min_child_weight);
        let subsample = real(self.subsample);
        let max_depth = rng.gen_range(self.max_depth.0..=self.max_depth.1);
        let reg_alpha = *self.reg_alpha.choose(rng).unwrap_or(&REG_ALPHA_CHOICES[0]);
        GbtConfig {
            max_depth,
            gamma,
            reg_alpha,
            reg_lambda,
            colsample_bytree,
            min_child_weight,
            subsample,
            n_estimators: self.n_estimators,
            learning_rate: self.learning_rate,
            scale_pos_weight: 1.0,
            seed: 0,
        }
    }
}

/// One evaluated candidate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Trial {
    pub config: GbtConfig,
    pub valid_loss: f64,
}

/// Proposes configurations. `history` holds every earlier trial, which lets a
/// model-based sampler steer its proposals.
pub trait Sampler {
    fn propose(&mut self, trial: usize, history: &[Trial]) -> GbtConfig;
}

/// Independent uniform draws from a [`SearchSpace`].
#[derive(Debug, Clone)]
pub struct RandomSearch {
    pub space: SearchSpace,
    pub seed: u64,
}

impl Sampler for RandomSearch {
    fn propose(&mut self, trial: usize, _history: &[Trial]) -> GbtConfig {
        let mut rng = seed::rng(seed::derive_indexed(self.seed, "tune/sample", trial as u64));
        self.space.sample(&mut rng)
    }
}

/// Cycles through a fixed list.
#[derive(Debug, Clone)]
pub struct FixedCandidates(pub Vec<GbtConfig>);

impl Sampler for FixedCandidates {
    fn propose(&mut self, trial: usize, _history: &[Trial]) -> GbtConfig {
        self.0[trial % self.0.len()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TuneOptions {
    pub valid_fraction: f64,
    pub budget: usize,
    pub seed: u64,
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            valid_fraction: 0.2,
            budget: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TuneResult {
    pub best: GbtConfig,
    pub best_loss: f64,
    pub trials: Vec<Trial>,
}

const SPLIT_ATTEMPTS: usize = 10;

/// Stratified split: each class contributes `round(valid_fraction · n_class)`
/// rows to validation. Returns `(train, valid)` index lists in ascending
/// order. Redrawn up to ten times when either side lacks a class.
pub fn stratified_split(labels: &[bool], valid_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), GbtError> {
    for attempt in 0..SPLIT_ATTEMPTS {
        let mut rng = seed::rng(seed::derive_indexed(seed, "tune/split", attempt as u64));
        let mut train = Vec::new();
        let mut valid = Vec::new();
        for class in [false, true] {
            let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
            idx.shuffle(&mut rng);
            let k = libm::round(valid_fraction * idx.len() as f64) as usize;
            valid.extend_from_slice(&idx[..k.min(idx.len())]);
            train.extend_from_slice(&idx[k.min(idx.len())..]);
        }
        train.sort_unstable();
        valid.sort_unstable();
        let has_both = |s: &[usize]| s.iter().any(|&i| labels[i]) && s.iter().any(|&i| !labels[i]);
        if has_both(&train) && has_both(&valid) {
            return Ok((train, valid));
        }
    }
    Err(GbtError::Split(SPLIT_ATTEMPTS))
}

/// Evaluates `budget` proposals and returns the one with the lowest
/// validation log-loss (earliest wins ties). Each candidate is trained with
/// `scale_pos_weight` set to the training split's imbalance and a seed
/// derived from the trial number.
pub fn tune(data: &Dataset, options: &TuneOptions, sampler: &mut dyn Sampler) -> Result<TuneResult, GbtError> {
    if options.budget == 0 {
        return Err(GbtError::NoBudget);
    }
    data.check_trainable()?;
    let (train_idx, valid_idx) = stratified_split(data.labels(), options.valid_fraction, options.seed)?;
    let train_set = data.subset(&train_idx);
    let valid_set = data.subset(&valid_idx);
    let spw = train_set.imbalance();
    let mut trials: Vec<Trial> = Vec::with_capacity(options.budget);
    let mut best: Option<usize> = None;
    for i in 0..options.budget {
        let mut config = sampler.propose(i, &trials);
        config.scale_pos_weight = spw;
        config.seed = seed::derive_indexed(options.seed, "tune/trial", i as u64);
        let model = train(&train_set, &config)?;
        let probs = model.predict_many(valid_set.rows())?;
        let mut valid_loss = log_loss(&probs, valid_set.labels());
        if valid_loss.is_nan() {
            valid_loss = f64::INFINITY;
        }
        trials.push(Trial { config, valid_loss });
        if best.is_none_or(|b| valid_loss < trials[b].valid_loss) {
            best = Some(i);
        }
    }
    let b = trials[best.unwrap()];
    Ok(TuneResult {
        best: b.config,
        best_loss: b.valid_loss,
        trials,
    })
}

/// The tuned configuration refit for final training: new learning rate and
/// round count, `scale_pos_weight` set to the full training imbalance.
pub fn final_config(
    tuned: &GbtConfig,
    data: &Dataset,
    learning_rate: f64,
    n_estimators: usize,
    seed: u64,
) -> GbtConfig {
    GbtConfig {
        learning_rate,
        n_estimators,
        scale_pos_weight: data.imbalance(),
        seed,
        ..*tuned
    }
}

impl<S: Sampler + ?Sized> Sampler for Box<S> {
    fn propose(&mut self, trial: usize, history: &[Trial]) -> GbtConfig {
        (**self).propose(trial, history)
    }
}
