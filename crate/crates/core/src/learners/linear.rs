//! Linear learners trained by stochastic gradient descent on standardized
//! features: logistic regression and a hinge-loss SVM with Platt scaling.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_fit_data, check_rows, not_fitted, proba, Hyper, LearnerKind, ProbabilisticClassifier};
use crate::data::{Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::stats::sigmoid;

#[derive(Debug, Clone)]
struct LinearModel {
    scaler: Standardizer,
    weights: Vec<f64>,
    bias: f64,
}

impl LinearModel {
    fn decision(&self, row: &[f64]) -> f64 {
        let x = self.scaler.transform_row(row);
        self.bias + self.weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy)]
struct SgdSettings {
    learning_rate: f64,
    epochs: usize,
    l2: f64,
    seed: u64,
}

impl SgdSettings {
    fn read(hp: &mut Hyper) -> Result<Self> {
        Ok(Self {
            learning_rate: hp.real("learning_rate", 0.01, |v| v > 0.0)?,
            epochs: hp.count("epochs", 50, 1)?,
            l2: hp.real("l2", 1e-4, |v| v >= 0.0)?,
            seed: hp.seed(),
        })
    }

    fn to_map(self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("learning_rate".into(), self.learning_rate),
            ("epochs".into(), self.epochs as f64),
            ("l2".into(), self.l2),
        ])
    }
}

/// Run SGD over standardized rows; `step` returns the loss derivative with
/// respect to the decision value for one sample.
fn sgd_fit(
    data: &Dataset,
    settings: SgdSettings,
    step: impl Fn(f64, f64) -> f64,
) -> Result<LinearModel> {
    check_fit_data(data)?;
    let scaler = Standardizer::fit(&data.rows);
    let x = scaler.transform(&data.rows);
    let d = data.n_features();
    let mut weights = vec![0.0; d];
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    for _ in 0..settings.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let f = bias + weights.iter().zip(&x[i]).map(|(w, v)| w * v).sum::<f64>();
            let g = step(f, data.labels[i] as f64);
            for (w, v) in weights.iter_mut().zip(&x[i]) {
                *w -= settings.learning_rate * (g * v + settings.l2 * *w);
            }
            bias -= settings.learning_rate * g;
        }
    }
    if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numeric("linear model diverged".into()));
    }
    Ok(LinearModel {
        scaler,
        weights,
        bias,
    })
}

/// Logistic regression fitted by per-sample SGD.
#[derive(Debug, Clone)]
pub struct LogisticSgd {
    settings: SgdSettings,
    model: Option<LinearModel>,
}

impl LogisticSgd {
    pub(crate) fn from_hyper(hp: &mut Hyper) -> Result<Self> {
        Ok(Self {
            settings: SgdSettings::read(hp)?,
            model: None,
        })
    }
}

impl ProbabilisticClassifier for LogisticSgd {
    fn kind(&self) -> LearnerKind {
        LearnerKind::Sgd
    }

    fn hyperparameters(&self) -> BTreeMap<String, f64> {
        self.settings.to_map()
    }

    fn fit(&mut self, data: &Dataset) -> Result<()> {
        // d(log loss)/df = sigmoid(f) - y
        self.model = Some(sgd_fit(data, self.settings, |f, y| sigmoid(f) - y)?);
        Ok(())
    }

    fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
        let model = self.model.as_ref().ok_or_else(|| not_fitted(self.kind()))?;
        check_rows(rows, model.weights.len())?;
        Ok(rows.iter().map(|r| proba(sigmoid(model.decision(r)))).collect())
    }
}

/// Linear SVM (hinge loss, subgradient SGD) with probabilities from a
/// sigmoid fitted to its training decision values.
#[derive(Debug, Clone)]
pub struct LinearSvm {
    settings: SgdSettings,
    model: Option<(LinearModel, PlattScaling)>,
}

impl LinearSvm {
    pub(crate) fn from_hyper(hp: &mut Hyper) -> Result<Self> {
        Ok(Self {
            settings: SgdSettings::read(hp)?,
            model: None,
        })
    }
}

impl ProbabilisticClassifier for LinearSvm {
    fn kind(&self) -> LearnerKind {
        LearnerKind::Svm
    }

    fn hyperparameters(&self) -> BTreeMap<String, f64> {
        self.settings.to_map()
    }

    fn fit(&mut self, data: &Dataset) -> Result<()> {
        let linear = sgd_fit(data, self.settings, |f, y| {
            let t = 2.0 * y - 1.0;
            if t * f < 1.0 {
                -t
            } else {
                0.0
            }
        })?;
        let decisions: Vec<f64> = data.rows.iter().map(|r| linear.decision(r)).collect();
        let platt = PlattScaling::fit(&decisions, &data.labels);
        self.model = Some((linear, platt));
        Ok(())
    }

    fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
        let (model, platt) = self.model.as_ref().ok_or_else(|| not_fitted(self.kind()))?;
        check_rows(rows, model.weights.len())?;
        Ok(rows
            .iter()
            .map(|r| proba(platt.probability(model.decision(r))))
            .collect())
    }
}

/// `p(class 1 | f) = 1 / (1 + exp(a f + b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PlattScaling {
    a: f64,
    b: f64,
}

impl PlattScaling {
    /// Newton's method with backtracking on the regularized targets of
    /// Platt (1999).
    pub(crate) fn fit(decisions: &[f64], labels: &[u8]) -> Self {
        let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
        let n_neg = labels.len() as f64 - n_pos;
        let hi = (n_pos + 1.0) / (n_pos + 2.0);
        let lo = 1.0 / (n_neg + 2.0);
        let targets: Vec<f64> = labels.iter().map(|&l| if l == 1 { hi } else { lo }).collect();

        let objective = |a: f64, b: f64| -> f64 {
            decisions
                .iter()
                .zip(&targets)
                .map(|(f, t)| {
                    let z = a * f + b;
                    // t * log(1 + e^z) + (1 - t) * log(1 + e^-z), stably
                    let log1p_exp = |z: f64| if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
                    t * log1p_exp(z) + (1.0 - t) * log1p_exp(-z)
                })
                .sum()
        };

        let mut a = 0.0;
        let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
        let mut value = objective(a, b);
        for _ in 0..100 {
            let (mut g1, mut g2, mut h11, mut h22, mut h21) = (0.0, 0.0, 1e-12, 1e-12, 0.0);
            for (f, t) in decisions.iter().zip(&targets) {
                let p = sigmoid(-(a * f + b));
                let d1 = t - p;
                let d2 = p * (1.0 - p);
                g1 += f * d1;
                g2 += d1;
                h11 += f * f * d2;
                h22 += d2;
                h21 += f * d2;
            }
            if g1.abs() < 1e-9 && g2.abs() < 1e-9 {
                break;
            }
            let det = h11 * h22 - h21 * h21;
            let da = -(h22 * g1 - h21 * g2) / det;
            let db = -(-h21 * g1 + h11 * g2) / det;
            let mut step = 1.0;
            let mut improved = false;
            while step > 1e-10 {
                let (na, nb) = (a + step * da, b + step * db);
                let nv = objective(na, nb);
                if nv < value + 1e-4 * step * (g1 * da + g2 * db) {
                    a = na;
                    b = nb;
                    value = nv;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Self { a, b }
    }

    pub(crate) fn probability(&self, decision: f64) -> f64 {
        sigmoid(-(self.a * decision + self.b))
    }
}
