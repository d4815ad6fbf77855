use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_fit_data, check_rows, not_fitted, proba, Hyper, LearnerKind, ProbabilisticClassifier};
use crate::data::Dataset;
use crate::error::Result;
use crate::stats::derive_seed;
use crate::tree::{self, Criterion, GrowParams, Tree};

/// Extremely randomized trees on the full training set; the class-1
/// probability is the mean leaf class-1 frequency.
#[derive(Debug, Clone)]
pub struct ExtraTrees {
    n_trees: usize,
    max_depth: usize,
    min_samples_split: usize,
    features_per_split: Option<usize>,
    seed: u64,
    n_features: usize,
    trees: Vec<Tree>,
}

impl ExtraTrees {
    pub(crate) fn from_hyper(hp: &mut Hyper) -> Result<Self> {
        Ok(Self {
            n_trees: hp.count("n_trees", 100, 1)?,
            max_depth: hp.count("max_depth", 16, 1)?,
            min_samples_split: hp.count("min_samples_split", 2, 2)?,
            // 0 selects ceil(sqrt(d))
            features_per_split: match hp.count("features_per_split", 0, 0)? {
                0 => None,
                k => Some(k),
            },
            seed: hp.seed(),
            n_features: 0,
            trees: Vec::new(),
        })
    }
}

impl ProbabilisticClassifier for ExtraTrees {
    fn kind(&self) -> LearnerKind {
        LearnerKind::ExtraTrees
    }

    fn hyperparameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("n_trees".into(), self.n_trees as f64),
            ("max_depth".into(), self.max_depth as f64),
            ("min_samples_split".into(), self.min_samples_split as f64),
            ("features_per_split".into(), self.features_per_split.unwrap_or(0) as f64),
        ])
    }

    fn fit(&mut self, data: &Dataset) -> Result<()> {
        check_fit_data(data)?;
        let columns = data.columns();
        let d = columns.len();
        let y: Vec<f64> = data.labels.iter().map(|&l| l as f64).collect();
        let w = vec![1.0; y.len()];
        let params = GrowParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split as f64,
            features_per_split: self
                .features_per_split
                .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
                .clamp(1, d),
            criterion: Criterion::Gini,
        };
        let seed = self.seed;
        self.trees = (0..self.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
                tree::grow_random(&columns, &y, &w, (0..y.len()).collect(), params, &mut rng)
            })
            .collect();
        self.n_features = d;
        Ok(())
    }

    fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
        if self.trees.is_empty() {
            return Err(not_fitted(self.kind()));
        }
        check_rows(rows, self.n_features)?;
        let k = self.trees.len() as f64;
        Ok(rows
            .iter()
            .map(|r| proba(self.trees.iter().map(|t| t.predict(r)).sum::<f64>() / k))
            .collect())
    }
}
