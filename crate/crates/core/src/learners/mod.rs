//! First-layer probabilistic classifiers.
//!
//! Six learners share the [`ProbabilisticClassifier`] interface and are
//! built from a [`ClassifierSpec`] by [`build`]. Gradient-based learners
//! standardize their inputs with statistics from their own training rows;
//! tree learners use raw features.

mod adaboost;
mod boosted_trees;
mod extra_trees;
mod linear;
mod mlp;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub use adaboost::AdaBoost;
pub use boosted_trees::BoostedTrees;
pub use extra_trees::ExtraTrees;
pub use linear::{LinearSvm, LogisticSgd};
pub use mlp::Mlp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LearnerKind {
    BoostedTrees,
    Sgd,
    ExtraTrees,
    AdaBoost,
    Svm,
    Mlp,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 6] = [
        LearnerKind::BoostedTrees,
        LearnerKind::Sgd,
        LearnerKind::ExtraTrees,
        LearnerKind::AdaBoost,
        LearnerKind::Svm,
        LearnerKind::Mlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::BoostedTrees => "boosted_trees",
            LearnerKind::Sgd => "sgd",
            LearnerKind::ExtraTrees => "extra_trees",
            LearnerKind::AdaBoost => "adaboost",
            LearnerKind::Svm => "svm",
            LearnerKind::Mlp => "mlp",
        }
    }

    pub fn abbreviation(self) -> &'static str {
        match self {
            LearnerKind::BoostedTrees => "BT",
            LearnerKind::Sgd => "SGD",
            LearnerKind::ExtraTrees => "ET",
            LearnerKind::AdaBoost => "AB",
            LearnerKind::Svm => "SVM",
            LearnerKind::Mlp => "MLP",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    /// Accepts the snake_case name or the short abbreviation, any case.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s) || k.abbreviation().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown classifier kind '{s}'")))
    }
}

impl TryFrom<String> for LearnerKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<LearnerKind> for String {
    fn from(k: LearnerKind) -> String {
        k.name().to_string()
    }
}

/// Which learner to build, its hyperparameters and its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: LearnerKind,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: LearnerKind, seed: u64) -> Self {
        Self {
            kind,
            hyperparameters: BTreeMap::new(),
            seed,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.hyperparameters.insert(key.to_string(), value);
        self
    }

    /// The six default learners, seeded from `seed`.
    pub fn default_roster(seed: u64) -> Vec<ClassifierSpec> {
        LearnerKind::ALL
            .iter()
            .enumerate()
            .map(|(i, &k)| ClassifierSpec::new(k, crate::stats::derive_seed(seed, 100 + i as u64)))
            .collect()
    }
}

pub trait ProbabilisticClassifier: Send + Sync {
    fn kind(&self) -> LearnerKind;

    /// Effective hyperparameters, defaults filled in.
    fn hyperparameters(&self) -> BTreeMap<String, f64>;

    fn fit(&mut self, data: &Dataset) -> Result<()>;

    /// One `[p(class 0), p(class 1)]` row per input row.
    fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>>;
}

/// Build an untrained classifier from its spec.
pub fn build(spec: &ClassifierSpec) -> Result<Box<dyn ProbabilisticClassifier>> {
    let mut hp = Hyper::new(spec);
    let model: Box<dyn ProbabilisticClassifier> = match spec.kind {
        LearnerKind::Sgd => Box::new(LogisticSgd::from_hyper(&mut hp)?),
        LearnerKind::Svm => Box::new(LinearSvm::from_hyper(&mut hp)?),
        LearnerKind::Mlp => Box::new(Mlp::from_hyper(&mut hp)?),
        LearnerKind::AdaBoost => Box::new(AdaBoost::from_hyper(&mut hp)?),
        LearnerKind::ExtraTrees => Box::new(ExtraTrees::from_hyper(&mut hp)?),
        LearnerKind::BoostedTrees => Box::new(BoostedTrees::from_hyper(&mut hp)?),
    };
    hp.finish()?;
    Ok(model)
}

/// Reads hyperparameters with defaults and rejects keys nobody asked for.
pub(crate) struct Hyper<'a> {
    spec: &'a ClassifierSpec,
    used: Vec<&'static str>,
}

impl<'a> Hyper<'a> {
    fn new(spec: &'a ClassifierSpec) -> Self {
        Self {
            spec,
            used: Vec::new(),
        }
    }

    pub(crate) fn seed(&self) -> u64 {
        self.spec.seed
    }

    pub(crate) fn real(&mut self, key: &'static str, default: f64, valid: impl Fn(f64) -> bool) -> Result<f64> {
        self.used.push(key);
        let v = self.spec.hyperparameters.get(key).copied().unwrap_or(default);
        if !v.is_finite() || !valid(v) {
            return Err(Error::Config(format!(
                "{}: invalid value {v} for '{key}'",
                self.spec.kind
            )));
        }
        Ok(v)
    }

    pub(crate) fn count(&mut self, key: &'static str, default: usize, min: usize) -> Result<usize> {
        let v = self.real(key, default as f64, |v| v.fract() == 0.0 && v >= min as f64)?;
        Ok(v as usize)
    }

    fn finish(self) -> Result<()> {
        match self
            .spec
            .hyperparameters
            .keys()
            .find(|k| !self.used.contains(&k.as_str()))
        {
            Some(k) => Err(Error::Config(format!(
                "{}: unknown hyperparameter '{k}'",
                self.spec.kind
            ))),
            None => Ok(()),
        }
    }
}

pub(crate) fn check_fit_data(data: &Dataset) -> Result<()> {
    if data.n_samples() == 0 {
        return Err(Error::Data("cannot fit on an empty dataset".into()));
    }
    if data.n_features() == 0 {
        return Err(Error::Data("cannot fit without features".into()));
    }
    data.require_both_classes()
}

pub(crate) fn check_rows(rows: &[Vec<f64>], n_features: usize) -> Result<()> {
    match rows.iter().find(|r| r.len() != n_features) {
        Some(r) => Err(Error::Dimension {
            expected: n_features,
            actual: r.len(),
        }),
        None => Ok(()),
    }
}

pub(crate) fn not_fitted(kind: LearnerKind) -> Error {
    Error::Config(format!("{kind} used before fit"))
}

pub(crate) fn proba(p1: f64) -> [f64; 2] {
    let p1 = p1.clamp(0.0, 1.0);
    [1.0 - p1, p1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_parsing() {
        assert_eq!("sgd".parse::<LearnerKind>().unwrap(), LearnerKind::Sgd);
        assert_eq!("BT".parse::<LearnerKind>().unwrap(), LearnerKind::BoostedTrees);
        assert!(matches!("foo".parse::<LearnerKind>(), Err(Error::Config(_))));
        let spec: std::result::Result<ClassifierSpec, _> =
            serde_json::from_str(r#"{"kind": "foo"}"#);
        assert!(spec.is_err());
    }

    #[test]
    fn unknown_hyperparameter_rejected() {
        let spec = ClassifierSpec::new(LearnerKind::Sgd, 0).with("depth", 3.0);
        assert!(matches!(build(&spec), Err(Error::Config(_))));
        let spec = ClassifierSpec::new(LearnerKind::Mlp, 0).with("hidden_units", 0.0);
        assert!(matches!(build(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn factory_dispatch() {
        for kind in LearnerKind::ALL {
            let model = build(&ClassifierSpec::new(kind, 1)).unwrap();
            assert_eq!(model.kind(), kind);
        }
    }
}
