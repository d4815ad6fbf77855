//! Bootstrap-forest feature screening.
//!
//! A forest of Gini trees is grown on bootstrap resamples. Each feature's
//! contribution is its share of the total node-size-weighted impurity
//! decrease across the forest, in percent. Features below a threshold are
//! dropped.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::derive_seed;
use crate::tree::{self, Criterion, GrowParams, Tree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 10,
            min_samples_split: 5,
            features_per_split: None,
            seed: 0,
        }
    }
}

impl ForestConfig {
    fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("forest needs at least one tree".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::Config("features_per_split must be at least 1".into()));
        }
        Ok(())
    }

    pub fn resolved_features_per_split(&self, n_features: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features.max(1))
    }
}

/// A fitted bootstrap forest. Immutable once built.
///
/// Trees are grown on the columns sorted by feature name, so random
/// candidate orders and tie-breaks follow feature identity rather than
/// column position.
#[derive(Debug, Clone)]
pub struct BootstrapForest {
    feature_names: Vec<String>,
    /// Dataset column of each tree feature index.
    column_order: Vec<usize>,
    trees: Vec<Tree>,
}

impl BootstrapForest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Names in dataset column order.
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Dataset column index behind tree feature index `f`.
    pub fn column_of(&self, f: usize) -> usize {
        self.column_order[f]
    }

    /// Mean class-1 probability over trees, for a row in dataset column order.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let reordered: Vec<f64> = self.column_order.iter().map(|&j| row[j]).collect();
        self.trees.iter().map(|t| t.predict(&reordered)).sum::<f64>() / self.trees.len() as f64
    }
}

pub fn fit_bootstrap_forest(data: &Dataset, config: &ForestConfig) -> Result<BootstrapForest> {
    config.validate()?;
    let n = data.n_samples();
    if n < 2 {
        return Err(Error::DegenerateLabels(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    data.require_both_classes()?;
    let d = data.n_features();
    if d == 0 {
        return Err(Error::Data("dataset has no features".into()));
    }

    let mut column_order: Vec<usize> = (0..d).collect();
    column_order.sort_by(|&a, &b| data.feature_names[a].cmp(&data.feature_names[b]));
    let mut all_columns = data.columns();
    let columns: Vec<Vec<f64>> = column_order
        .iter()
        .map(|&j| std::mem::take(&mut all_columns[j]))
        .collect();
    let y: Vec<f64> = data.labels.iter().map(|&l| l as f64).collect();
    let sorted = tree::presort(&columns);
    let params = GrowParams {
        max_depth: config.max_depth,
        min_samples_split: config.min_samples_split as f64,
        features_per_split: config.resolved_features_per_split(d),
        criterion: Criterion::Gini,
    };

    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, t as u64));
            let mut weights = vec![0.0; n];
            for _ in 0..n {
                weights[rng.gen_range(0..n)] += 1.0;
            }
            let lists = sorted
                .iter()
                .map(|list| list.iter().copied().filter(|&r| weights[r] > 0.0).collect())
                .collect();
            tree::grow_best(&columns, &y, &weights, lists, params, &mut rng)
        })
        .collect();

    Ok(BootstrapForest {
        feature_names: data.feature_names.clone(),
        column_order,
        trees,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureContribution {
    pub name: String,
    pub contribution_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub threshold: f64,
    /// In dataset column order.
    pub features: Vec<FeatureContribution>,
    /// Retained names in dataset column order.
    pub retained: Vec<String>,
}

impl ScreeningReport {
    pub fn contribution(&self, name: &str) -> Option<f64> {
        self.features
            .iter()
            .find(|f| f.name == name)
            .map(|f| f.contribution_percent)
    }

    /// Re-apply a different threshold to the same contributions.
    pub fn with_threshold(&self, threshold: f64) -> ScreeningReport {
        ScreeningReport {
            threshold,
            features: self.features.clone(),
            retained: self
                .features
                .iter()
                .filter(|f| f.contribution_percent >= threshold)
                .map(|f| f.name.clone())
                .collect(),
        }
    }

    /// Features sorted by contribution, largest first.
    pub fn ranked(&self) -> Vec<FeatureContribution> {
        let mut ranked = self.features.clone();
        ranked.sort_by(|a, b| b.contribution_percent.total_cmp(&a.contribution_percent));
        ranked
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// `name,contribution_percent`, sorted descending.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("name,contribution_percent\n");
        for f in self.ranked() {
            out.push_str(&format!("{},{}\n", f.name, f.contribution_percent));
        }
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Per-feature contribution percentages; `retained` lists every feature.
pub fn feature_contributions(forest: &BootstrapForest) -> ScreeningReport {
    let d = forest.feature_names.len();
    let mut totals = vec![0.0; d];
    // summed in tree index order for reproducibility
    for tree in &forest.trees {
        for (f, v) in tree.importances(d).into_iter().enumerate() {
            totals[forest.column_order[f]] += v;
        }
    }
    let sum: f64 = totals.iter().sum();
    let percents: Vec<f64> = if sum > 0.0 {
        totals.iter().map(|t| 100.0 * t / sum).collect()
    } else {
        // no tree ever split: nothing to tell the features apart
        vec![100.0 / d as f64; d]
    };
    let features = forest
        .feature_names
        .iter()
        .zip(percents)
        .map(|(name, p)| FeatureContribution {
            name: name.clone(),
            contribution_percent: p,
        })
        .collect();
    ScreeningReport {
        threshold: 0.0,
        features,
        retained: forest.feature_names.clone(),
    }
}

/// Fit a forest and keep the features contributing at least
/// `threshold_percent`.
pub fn screen(data: &Dataset, config: &ForestConfig, threshold_percent: f64) -> Result<ScreeningReport> {
    if !(0.0..=100.0).contains(&threshold_percent) {
        return Err(Error::Config(format!(
            "threshold {threshold_percent} outside [0, 100]"
        )));
    }
    let forest = fit_bootstrap_forest(data, config)?;
    Ok(feature_contributions(&forest).with_threshold(threshold_percent))
}

/// Shuffle helper used by tests and examples that need column permutations.
pub fn permute_columns(data: &Dataset, permutation: &[usize]) -> Dataset {
    Dataset {
        feature_names: permutation.iter().map(|&j| data.feature_names[j].clone()).collect(),
        rows: data
            .rows
            .iter()
            .map(|r| permutation.iter().map(|&j| r[j]).collect())
            .collect(),
        labels: data.labels.clone(),
    }
}

/// A random permutation of `0..n`.
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, 1.0]).collect();
        let labels = (0..40).map(|i| (i >= 20) as u8).collect();
        Dataset::new(vec!["a".into(), "b".into()], rows, labels).unwrap()
    }

    #[test]
    fn single_contributor_gets_everything() {
        let report = screen(&tiny(), &ForestConfig::default(), 0.5).unwrap();
        assert_eq!(report.contribution("a"), Some(100.0));
        assert_eq!(report.contribution("b"), Some(0.0));
        assert_eq!(report.retained, vec!["a".to_string()]);
    }

    #[test]
    fn zero_threshold_keeps_everything() {
        let report = screen(&tiny(), &ForestConfig::default(), 0.0).unwrap();
        assert_eq!(report.retained.len(), 2);
    }

    #[test]
    fn degenerate_inputs() {
        let one = tiny().subset(&[0]);
        assert!(fit_bootstrap_forest(&one, &ForestConfig::default()).is_err());
        let single_class = tiny().subset(&[0, 1, 2, 3]);
        assert!(matches!(
            fit_bootstrap_forest(&single_class, &ForestConfig::default()),
            Err(Error::DegenerateLabels(_))
        ));
        assert!(screen(&tiny(), &ForestConfig::default(), 120.0).is_err());
        let bad = ForestConfig {
            n_trees: 0,
            ..ForestConfig::default()
        };
        assert!(matches!(fit_bootstrap_forest(&tiny(), &bad), Err(Error::Config(_))));
    }
}
