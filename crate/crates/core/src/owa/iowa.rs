//! Learned OWA weights.
//!
//! Position weights are parameterized as `w = softmax(beta)` so any real
//! `beta` yields a point on the simplex. For one observation with ordered
//! arguments `b` and target `d` the instantaneous error is
//! `e = 0.5 * (b . w - d)^2` and its gradient is
//! `de/dbeta_i = w_i (b_i - d_hat)(d_hat - d)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ArgumentVector, OwaWeightVector};
use crate::error::{Error, Result};

/// One `(arguments, target)` observation.
#[derive(Debug, Clone, PartialEq)]
pub struct IowaTrainingSample {
    pub arguments: ArgumentVector,
    pub target: f64,
}

impl IowaTrainingSample {
    pub fn new(arguments: ArgumentVector, target: f64) -> Result<Self> {
        if !target.is_finite() || !(0.0..=1.0).contains(&target) {
            return Err(Error::Data(format!(
                "training target {target} is not a finite value in [0, 1]"
            )));
        }
        Ok(Self { arguments, target })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IowaConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Training stops once the epoch-mean error improves by less than this.
    pub tolerance: f64,
    /// Seeds the per-epoch shuffle of the observations.
    pub seed: u64,
}

impl Default for IowaConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_epochs: 200,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IowaModel {
    pub betas: Vec<f64>,
    pub learning_rate: f64,
    pub epochs_run: usize,
    pub final_mean_error: f64,
    /// Epoch-mean instantaneous error, one entry per epoch.
    #[serde(default)]
    pub error_history: Vec<f64>,
}

impl IowaModel {
    /// Untrained model with uniform weights over `n` positions.
    pub fn uniform(n: usize) -> Self {
        Self {
            betas: vec![0.0; n],
            learning_rate: IowaConfig::default().learning_rate,
            epochs_run: 0,
            final_mean_error: 0.0,
            error_history: Vec::new(),
        }
    }

    pub fn from_betas(betas: Vec<f64>) -> Self {
        Self {
            betas,
            ..Self::uniform(0)
        }
    }

    pub fn arity(&self) -> usize {
        self.betas.len()
    }
}

fn softmax(betas: &[f64]) -> Vec<f64> {
    let max = betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = betas.iter().map(|b| (b - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Softmax of the model parameters.
pub fn iowa_weights(model: &IowaModel) -> Result<OwaWeightVector> {
    if model.betas.is_empty() {
        return Err(Error::CorruptModel("model has no parameters".into()));
    }
    if let Some(b) = model.betas.iter().find(|b| !b.is_finite()) {
        return Err(Error::CorruptModel(format!("non-finite parameter {b}")));
    }
    Ok(OwaWeightVector(softmax(&model.betas)))
}

/// Sort the arguments descending and take the weighted sum.
pub fn iowa_predict(model: &IowaModel, args: &ArgumentVector) -> Result<f64> {
    if args.len() != model.arity() {
        return Err(Error::Dimension {
            expected: model.arity(),
            actual: args.len(),
        });
    }
    let weights = iowa_weights(model)?;
    let value = weights.apply_ordered(&args.ordered().sorted);
    Ok(value.clamp(args.min(), args.max()))
}

/// Instantaneous squared error `0.5 (b . softmax(beta) - d)^2` for one
/// observation at the given parameters.
pub fn iowa_error(betas: &[f64], sample: &IowaTrainingSample) -> f64 {
    let w = softmax(betas);
    let ordered = sample.arguments.ordered();
    let d_hat: f64 = w.iter().zip(&ordered.sorted).map(|(w, b)| w * b).sum();
    0.5 * (d_hat - sample.target).powi(2)
}

/// Analytic gradient of [`iowa_error`] with respect to every parameter.
pub fn iowa_gradient(betas: &[f64], sample: &IowaTrainingSample) -> Vec<f64> {
    let w = softmax(betas);
    let b = sample.arguments.ordered().sorted;
    gradient_from(&w, &b, sample.target).0
}

fn gradient_from(w: &[f64], b: &[f64], target: f64) -> (Vec<f64>, f64) {
    let d_hat: f64 = w.iter().zip(b).map(|(w, b)| w * b).sum();
    let residual = d_hat - target;
    let grad = w
        .iter()
        .zip(b)
        .map(|(w_i, b_i)| w_i * (b_i - d_hat) * residual)
        .collect();
    (grad, 0.5 * residual * residual)
}

/// Learn position weights by per-observation gradient descent.
///
/// Parameters start at zero. Each epoch visits every observation once in a
/// seeded random order, recomputing the weights, the prediction and the
/// parameter update for each one. Training ends when the epoch-mean error
/// improves by less than `config.tolerance` or after `config.max_epochs`.
pub fn iowa_train(samples: &[IowaTrainingSample], config: &IowaConfig) -> Result<IowaModel> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Data("no training samples".into()))?;
    if !(config.learning_rate > 0.0 && config.learning_rate < 1.0) {
        return Err(Error::Config(format!(
            "learning rate {} outside (0, 1)",
            config.learning_rate
        )));
    }
    if config.max_epochs == 0 {
        return Err(Error::Config("max_epochs must be at least 1".into()));
    }
    let n = first.arguments.len();
    for s in samples {
        if s.arguments.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: s.arguments.len(),
            });
        }
        if !s.target.is_finite() {
            return Err(Error::Data(format!("non-finite target {}", s.target)));
        }
    }

    let ordered: Vec<Vec<f64>> = samples.iter().map(|s| s.arguments.ordered().sorted).collect();
    let mut betas = vec![0.0; n];
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut history = Vec::new();
    let mut previous = f64::INFINITY;

    for _ in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut total_error = 0.0;
        for &k in &order {
            let w = softmax(&betas);
            let (grad, error) = gradient_from(&w, &ordered[k], samples[k].target);
            total_error += error;
            for (beta, g) in betas.iter_mut().zip(&grad) {
                *beta -= config.learning_rate * g;
            }
        }
        let mean_error = total_error / samples.len() as f64;
        if !mean_error.is_finite() || betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numeric("IOWA training diverged".into()));
        }
        history.push(mean_error);
        let improvement = previous - mean_error;
        previous = mean_error;
        if improvement < config.tolerance {
            break;
        }
    }

    Ok(IowaModel {
        betas,
        learning_rate: config.learning_rate,
        epochs_run: history.len(),
        final_mean_error: previous,
        error_history: history,
    })
}
