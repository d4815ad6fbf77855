//! Confusion-matrix metrics and ROC analysis.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    /// Tally predictions against labels; class 1 is the positive class.
    pub fn from_predictions(predicted: &[u8], labels: &[u8]) -> Self {
        let mut c = Self::default();
        for (&p, &y) in predicted.iter().zip(labels) {
            match (p, y) {
                (1, 1) => c.tp += 1,
                (1, _) => c.fp += 1,
                (_, 1) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// The six scalar metrics. A metric whose denominator is zero is reported
/// as 0 and named in `degenerate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarMetrics {
    pub precision: f64,
    pub specificity: f64,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub mcc: f64,
    pub f1: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<String>,
}

impl ScalarMetrics {
    pub const NAMES: [&'static str; 6] = ["precision", "specificity", "accuracy", "sensitivity", "mcc", "f1"];

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "precision" => self.precision,
            "specificity" => self.specificity,
            "accuracy" => self.accuracy,
            "sensitivity" => self.sensitivity,
            "mcc" => self.mcc,
            "f1" => self.f1,
            _ => return None,
        })
    }
}

pub fn compute_metrics(counts: &ConfusionCounts) -> Result<ScalarMetrics> {
    if counts.total() == 0 {
        return Err(Error::Data("no evaluated samples".into()));
    }
    let (tp, fp, tn, fn_) = (counts.tp as f64, counts.fp as f64, counts.tn as f64, counts.fn_ as f64);
    let mut degenerate = Vec::new();
    let mut ratio = |name: &str, num: f64, den: f64| {
        if den > 0.0 {
            num / den
        } else {
            degenerate.push(name.to_string());
            0.0
        }
    };
    let precision = ratio("precision", tp, tp + fp);
    let specificity = ratio("specificity", tn, tn + fp);
    let accuracy = ratio("accuracy", tp + tn, tp + tn + fp + fn_);
    let sensitivity = ratio("sensitivity", tp, tp + fn_);
    let mcc = ratio(
        "mcc",
        tp * tn - fp * fn_,
        ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt(),
    );
    let f1 = ratio("f1", 2.0 * precision * sensitivity, precision + sensitivity);
    Ok(ScalarMetrics {
        precision,
        specificity,
        accuracy,
        sensitivity,
        mcc,
        f1,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Scores `>= threshold` are called positive; `inf` for the origin.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC points from the strictest threshold down, and the trapezoidal AUC.
///
/// Equal scores form a single step, which makes the area count tied
/// positive/negative pairs as one half.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<(Vec<RocPoint>, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric("non-finite ROC score".into()));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count() as f64;
    let negatives = labels.len() as f64 - positives;
    if positives == 0.0 || negatives == 0.0 {
        return Err(Error::DegenerateLabels("ROC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == 1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        let prev = *points.last().unwrap();
        let point = RocPoint {
            threshold,
            fpr: fp / negatives,
            tpr: tp / positives,
        };
        auc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
        points.push(point);
    }
    Ok((points, auc))
}

pub fn write_roc_csv(points: &[RocPoint], path: &Path) -> Result<()> {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.fpr, p.tpr));
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
