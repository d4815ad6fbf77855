//! Ordered weighted averaging.
//!
//! Two operators live here. [`dowa`] derives its position weights for every
//! input from how close each ordered argument sits to the argument mean, so
//! outlying predictions are damped. [`iowa`] learns one fixed set of
//! position weights from `(arguments, target)` observations by stochastic
//! gradient descent on a softmax parameterization.
//!
//! Both operate on [`ArgumentVector`]s: probabilities in `[0, 1]` reported
//! by a handful of classifiers for one class of one sample.

pub mod dowa;
pub mod iowa;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dowa::{dowa_aggregate, dowa_similarities, dowa_weights, mean_of};
pub use iowa::{
    iowa_error, iowa_gradient, iowa_predict, iowa_train, iowa_weights, IowaConfig, IowaModel,
    IowaTrainingSample,
};

/// Tolerance used when checking that weights lie on the probability simplex.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// A non-empty vector of probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentVector(Vec<f64>);

impl ArgumentVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArguments("argument vector is empty".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::InvalidArguments(format!(
                "argument {i} = {v} is not a finite value in [0, 1]"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Arguments sorted in descending order, remembering where each came from.
    pub fn ordered(&self) -> OrderedArguments {
        let mut permutation: Vec<usize> = (0..self.0.len()).collect();
        // sort_by is stable: tied values keep their original order
        permutation.sort_by(|&a, &b| self.0[b].total_cmp(&self.0[a]));
        let sorted = permutation.iter().map(|&i| self.0[i]).collect();
        OrderedArguments {
            sorted,
            permutation,
        }
    }
}

impl TryFrom<Vec<f64>> for ArgumentVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl TryFrom<&[f64]> for ArgumentVector {
    type Error = Error;

    fn try_from(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }
}

/// Arguments in non-increasing order.
///
/// `permutation[j]` is the original index of the `j`-th largest argument.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedArguments {
    pub sorted: Vec<f64>,
    pub permutation: Vec<usize>,
}

/// Weights attached to ordered positions: nonnegative, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OwaWeightVector(Vec<f64>);

impl OwaWeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArguments("weight vector is empty".into()));
        }
        let sum: f64 = weights.iter().sum();
        let in_range = weights
            .iter()
            .all(|w| w.is_finite() && (-SIMPLEX_TOLERANCE..=1.0 + SIMPLEX_TOLERANCE).contains(w));
        if !in_range || (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidArguments(format!(
                "weights {weights:?} do not lie on the probability simplex"
            )));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Weighted sum of already-ordered arguments.
    pub fn apply_ordered(&self, ordered: &[f64]) -> f64 {
        self.0.iter().zip(ordered).map(|(w, b)| w * b).sum()
    }
}
