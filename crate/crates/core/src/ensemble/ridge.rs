//! Ridge classifier on two-dimensional fusion vectors.
//!
//! Labels are encoded as -1/+1 and the penalized least-squares problem is
//! solved in closed form on centered features, leaving the bias
//! unpenalized. Class 1 is predicted when the score is >= 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub coefficients: [f64; 2],
    pub bias: f64,
    pub ridge_lambda: f64,
}

impl RidgeModel {
    pub fn score(&self, x: &[f64; 2]) -> f64 {
        self.coefficients[0] * x[0] + self.coefficients[1] * x[1] + self.bias
    }
}

pub fn ridge_fit(features: &[[f64; 2]], labels: &[u8], ridge_lambda: f64) -> Result<RidgeModel> {
    if !(ridge_lambda > 0.0) || !ridge_lambda.is_finite() {
        return Err(Error::Config(format!("ridge lambda must be positive, got {ridge_lambda}")));
    }
    if features.len() != labels.len() {
        return Err(Error::Dimension {
            expected: features.len(),
            actual: labels.len(),
        });
    }
    if features.len() < 2 {
        return Err(Error::Data("ridge needs at least two samples".into()));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite ridge feature".into()));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::Data("ridge labels must be 0 or 1".into()));
    }
    let n = features.len() as f64;
    let targets: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let mean_x = [0, 1].map(|j| features.iter().map(|x| x[j]).sum::<f64>() / n);
    let mean_y = targets.iter().sum::<f64>() / n;

    // A = Xc^T Xc + lambda I, r = Xc^T yc
    let (mut a00, mut a01, mut a11, mut r0, mut r1) = (ridge_lambda, 0.0, ridge_lambda, 0.0, 0.0);
    for (x, y) in features.iter().zip(&targets) {
        let (c0, c1, cy) = (x[0] - mean_x[0], x[1] - mean_x[1], y - mean_y);
        a00 += c0 * c0;
        a01 += c0 * c1;
        a11 += c1 * c1;
        r0 += c0 * cy;
        r1 += c1 * cy;
    }
    let det = a00 * a11 - a01 * a01;
    if !(det > 0.0) {
        return Err(Error::Numeric(format!("ridge system is singular (det {det})")));
    }
    let coefficients = [(a11 * r0 - a01 * r1) / det, (a00 * r1 - a01 * r0) / det];
    let bias = mean_y - coefficients[0] * mean_x[0] - coefficients[1] * mean_x[1];
    if !coefficients.iter().all(|c| c.is_finite()) || !bias.is_finite() {
        return Err(Error::Numeric("ridge solution is not finite".into()));
    }
    Ok(RidgeModel {
        coefficients,
        bias,
        ridge_lambda,
    })
}

/// `(predicted class, decision score)` per sample.
pub fn ridge_predict(model: &RidgeModel, features: &[Vec<f64>]) -> Result<Vec<(u8, f64)>> {
    features
        .iter()
        .map(|x| {
            if x.len() != 2 {
                return Err(Error::Dimension {
                    expected: 2,
                    actual: x.len(),
                });
            }
            let score = model.score(&[x[0], x[1]]);
            Ok(((score >= 0.0) as u8, score))
        })
        .collect()
}

/// Second-level model consuming the selected fusion vectors.
pub trait MetaLearner: Send + Sync {
    fn name(&self) -> &'static str;

    fn fit(&mut self, features: &[[f64; 2]], labels: &[u8]) -> Result<()>;

    /// Real-valued decision score; class 1 iff the score is >= 0.
    fn decision(&self, x: &[f64; 2]) -> Result<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeClassifier {
    pub ridge_lambda: f64,
    pub model: Option<RidgeModel>,
}

impl RidgeClassifier {
    pub fn new(ridge_lambda: f64) -> Self {
        Self {
            ridge_lambda,
            model: None,
        }
    }
}

impl MetaLearner for RidgeClassifier {
    fn name(&self) -> &'static str {
        "ridge"
    }

    fn fit(&mut self, features: &[[f64; 2]], labels: &[u8]) -> Result<()> {
        self.model = Some(ridge_fit(features, labels, self.ridge_lambda)?);
        Ok(())
    }

    fn decision(&self, x: &[f64; 2]) -> Result<f64> {
        self.model
            .as_ref()
            .map(|m| m.score(x))
            .ok_or_else(|| Error::Config("ridge meta-learner used before fit".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_two_sample_problem() {
        // hand solve: centered X = [(-.5, .5), (.5, -.5)], y = (1, -1)
        // (X^T X + I) beta = X^T y  =>  beta = (-0.5, 0.5), bias 0
        let model = ridge_fit(&[[0.0, 1.0], [1.0, 0.0]], &[1, 0], 1.0).unwrap();
        assert!((model.coefficients[0] + 0.5).abs() < 1e-15);
        assert!((model.coefficients[1] - 0.5).abs() < 1e-15);
        assert!(model.bias.abs() < 1e-15);
        // boundary where class0 == class1
        assert_eq!(model.score(&[0.3, 0.3]), 0.0);
        let preds = ridge_predict(&model, &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(preds.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 0]);
    }

    #[test]
    fn zero_score_is_class_one() {
        let model = RidgeModel {
            coefficients: [0.0, 0.0],
            bias: 0.0,
            ridge_lambda: 1.0,
        };
        assert_eq!(ridge_predict(&model, &[vec![0.2, 0.8]]).unwrap(), vec![(1, 0.0)]);
    }

    #[test]
    fn negation_flips_predictions() {
        let model = ridge_fit(&[[0.9, 0.1], [0.2, 0.8], [0.6, 0.3]], &[0, 1, 0], 0.5).unwrap();
        let flipped = RidgeModel {
            coefficients: [-model.coefficients[0], -model.coefficients[1]],
            bias: -model.bias,
            ..model
        };
        let x = vec![vec![0.9, 0.1], vec![0.2, 0.8]];
        let a = ridge_predict(&model, &x).unwrap();
        let b = ridge_predict(&flipped, &x).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.1, -q.1);
            assert_ne!(p.0, q.0);
        }
    }

    #[test]
    fn heavy_penalty_predicts_majority() {
        let x = [[0.9, 0.1], [0.8, 0.2], [0.1, 0.9], [0.7, 0.2]];
        let model = ridge_fit(&x, &[0, 0, 1, 0], 1e12).unwrap();
        assert!(model.coefficients.iter().all(|c| c.abs() < 1e-10));
        let preds = ridge_predict(&model, &[vec![0.1, 0.9]]).unwrap();
        assert_eq!(preds[0].0, 0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(ridge_fit(&[[0.0, 1.0], [1.0, 0.0]], &[1, 0], 0.0), Err(Error::Config(_))));
        assert!(matches!(ridge_fit(&[[f64::NAN, 1.0], [1.0, 0.0]], &[1, 0], 1.0), Err(Error::Data(_))));
        let model = ridge_fit(&[[0.0, 1.0], [1.0, 0.0]], &[1, 0], 1.0).unwrap();
        assert!(matches!(ridge_predict(&model, &[vec![1.0]]), Err(Error::Dimension { .. })));
    }
}
