//! Discrete AdaBoost (SAMME, two classes) over depth-1 Gini stumps.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_fit_data, check_rows, not_fitted, proba, Hyper, LearnerKind, ProbabilisticClassifier};
use crate::data::Dataset;
use crate::error::Result;
use crate::stats::sigmoid;
use crate::tree::{self, Criterion, GrowParams, Tree};

#[derive(Debug, Clone)]
pub struct AdaBoost {
    n_estimators: usize,
    learning_rate: f64,
    seed: u64,
    n_features: usize,
    stumps: Vec<(Tree, f64)>,
    fitted: bool,
}

impl AdaBoost {
    pub(crate) fn from_hyper(hp: &mut Hyper) -> Result<Self> {
        Ok(Self {
            n_estimators: hp.count("n_estimators", 50, 1)?,
            learning_rate: hp.real("learning_rate", 1.0, |v| v > 0.0)?,
            seed: hp.seed(),
            n_features: 0,
            stumps: Vec::new(),
            fitted: false,
        })
    }

    /// Sum of `alpha_t * h_t(x)` with `h_t` in `{-1, +1}`.
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.stumps.iter().map(|(t, a)| a * vote(t, row)).sum()
    }
}

fn vote(stump: &Tree, row: &[f64]) -> f64 {
    if stump.predict(row) >= 0.5 {
        1.0
    } else {
        -1.0
    }
}

impl ProbabilisticClassifier for AdaBoost {
    fn kind(&self) -> LearnerKind {
        LearnerKind::AdaBoost
    }

    fn hyperparameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("n_estimators".into(), self.n_estimators as f64),
            ("learning_rate".into(), self.learning_rate),
        ])
    }

    fn fit(&mut self, data: &Dataset) -> Result<()> {
        check_fit_data(data)?;
        let n = data.n_samples();
        let columns = data.columns();
        let sorted = tree::presort(&columns);
        let y: Vec<f64> = data.labels.iter().map(|&l| l as f64).collect();
        let signs: Vec<f64> = y.iter().map(|v| 2.0 * v - 1.0).collect();
        let params = GrowParams {
            max_depth: 1,
            min_samples_split: 0.0,
            features_per_split: columns.len(),
            criterion: Criterion::Gini,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut weights = vec![1.0 / n as f64; n];
        self.stumps.clear();
        for _ in 0..self.n_estimators {
            let stump = tree::grow_best(&columns, &y, &weights, sorted.clone(), params, &mut rng);
            let votes: Vec<f64> = data.rows.iter().map(|r| vote(&stump, r)).collect();
            let error: f64 = weights
                .iter()
                .zip(votes.iter().zip(&signs))
                .filter(|(_, (v, s))| v != s)
                .map(|(w, _)| w)
                .sum();
            if error >= 0.5 {
                // no better than chance; keep at least one stump
                if self.stumps.is_empty() {
                    self.stumps.push((stump, 1.0));
                }
                break;
            }
            if error <= 1e-12 {
                self.stumps.push((stump, 1.0));
                break;
            }
            let alpha = self.learning_rate * ((1.0 - error) / error).ln();
            for (w, (v, s)) in weights.iter_mut().zip(votes.iter().zip(&signs)) {
                if v != s {
                    *w *= alpha.exp();
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            self.stumps.push((stump, alpha));
        }
        self.n_features = data.n_features();
        self.fitted = true;
        Ok(())
    }

    /// Class-1 probability is the logistic of the margin. With SAMME's
    /// `alpha = ln((1 - e) / e)` the margin is on the log-odds scale.
    fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
        if !self.fitted {
            return Err(not_fitted(self.kind()));
        }
        check_rows(rows, self.n_features)?;
        Ok(rows
            .iter()
            .map(|r| proba(sigmoid(self.margin(r))))
            .collect())
    }
}
