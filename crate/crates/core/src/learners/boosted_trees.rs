use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_fit_data, check_rows, not_fitted, proba, Hyper, LearnerKind, ProbabilisticClassifier};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::sigmoid;
use crate::tree::{self, Criterion, GrowParams, Tree};

/// Gradient boosting with logistic loss. Each round fits a variance tree to
/// the residuals `y - p` and sets leaf values by one Newton step.
#[derive(Debug, Clone)]
pub struct BoostedTrees {
    n_trees: usize,
    max_depth: usize,
    learning_rate: f64,
    min_samples_split: usize,
    seed: u64,
    n_features: usize,
    init: f64,
    trees: Vec<Tree>,
    fitted: bool,
}

impl BoostedTrees {
    pub(crate) fn from_hyper(hp: &mut Hyper) -> Result<Self> {
        Ok(Self {
            n_trees: hp.count("n_trees", 100, 1)?,
            max_depth: hp.count("max_depth", 3, 1)?,
            learning_rate: hp.real("learning_rate", 0.1, |v| v > 0.0 && v <= 1.0)?,
            min_samples_split: hp.count("min_samples_split", 2, 2)?,
            seed: hp.seed(),
            n_features: 0,
            init: 0.0,
            trees: Vec::new(),
            fitted: false,
        })
    }

    fn raw_score(&self, row: &[f64]) -> f64 {
        self.init
            + self.learning_rate * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }
}

impl ProbabilisticClassifier for BoostedTrees {
    fn kind(&self) -> LearnerKind {
        LearnerKind::BoostedTrees
    }

    fn hyperparameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("n_trees".into(), self.n_trees as f64),
            ("max_depth".into(), self.max_depth as f64),
            ("learning_rate".into(), self.learning_rate),
            ("min_samples_split".into(), self.min_samples_split as f64),
        ])
    }

    fn fit(&mut self, data: &Dataset) -> Result<()> {
        check_fit_data(data)?;
        let n = data.n_samples();
        let columns = data.columns();
        let sorted = tree::presort(&columns);
        let y: Vec<f64> = data.labels.iter().map(|&l| l as f64).collect();
        let prior = y.iter().sum::<f64>() / n as f64;
        self.init = (prior / (1.0 - prior)).ln();
        let params = GrowParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split as f64,
            features_per_split: columns.len(),
            criterion: Criterion::Variance,
        };
        let ones = vec![1.0; n];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut scores = vec![self.init; n];
        self.trees.clear();
        for _ in 0..self.n_trees {
            let p: Vec<f64> = scores.iter().map(|&s| sigmoid(s)).collect();
            let residuals: Vec<f64> = y.iter().zip(&p).map(|(y, p)| y - p).collect();
            let mut t = tree::grow_best(&columns, &residuals, &ones, sorted.clone(), params, &mut rng);
            let leaves: Vec<usize> = data.rows.iter().map(|r| t.leaf_index(r)).collect();
            let mut num = vec![0.0; t.nodes().len()];
            let mut den = vec![0.0; t.nodes().len()];
            for i in 0..n {
                num[leaves[i]] += residuals[i];
                den[leaves[i]] += p[i] * (1.0 - p[i]);
            }
            for (leaf, (nu, de)) in num.iter().zip(&den).enumerate() {
                if t.nodes()[leaf].feature.is_none() {
                    t.set_value(leaf, if *de > 1e-12 { nu / de } else { 0.0 });
                }
            }
            for i in 0..n {
                scores[i] += self.learning_rate * t.nodes()[leaves[i]].value;
            }
            self.trees.push(t);
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Numeric("boosting scores diverged".into()));
        }
        self.n_features = data.n_features();
        self.fitted = true;
        Ok(())
    }

    fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
        if !self.fitted {
            return Err(not_fitted(self.kind()));
        }
        check_rows(rows, self.n_features)?;
        Ok(rows.iter().map(|r| proba(sigmoid(self.raw_score(r)))).collect())
    }
}
