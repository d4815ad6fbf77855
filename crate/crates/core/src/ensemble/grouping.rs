//! Splitting the six first-layer learners into a DOWA triple and an IOWA
//! triple from the correlation of their predictions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prediction::PredictionMatrix;
use crate::stats;

const TIE_TOLERANCE: f64 = 1e-12;

/// Pearson correlations between learners' class-1 probability columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub learners: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Learners whose predictions never vary; their correlations are 0.
    pub zero_variance: Vec<String>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a][b]
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.learners.len();
        if self.values.len() != k || self.values.iter().any(|r| r.len() != k) {
            return Err(Error::Config("correlation matrix is not square".into()));
        }
        for i in 0..k {
            if (self.values[i][i] - 1.0).abs() > 1e-9 {
                return Err(Error::Config("correlation diagonal is not 1".into()));
            }
            for j in 0..k {
                let v = self.values[i][j];
                if !v.is_finite() || (v - self.values[j][i]).abs() > 1e-9 {
                    return Err(Error::Config("correlation matrix is not symmetric".into()));
                }
            }
        }
        Ok(())
    }
}

pub fn correlation_matrix(preds: &PredictionMatrix) -> Result<CorrelationMatrix> {
    if preds.n_samples() < 2 {
        return Err(Error::Data("correlations need at least two samples".into()));
    }
    let columns: Vec<Vec<f64>> = (0..preds.learners.len()).map(|l| preds.column(l, 1)).collect();
    let (values, constant) = stats::correlation_matrix(&columns);
    Ok(CorrelationMatrix {
        learners: preds.learners.clone(),
        values,
        zero_variance: constant.into_iter().map(|i| preds.learners[i].clone()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingPlan {
    pub dowa_group: [String; 3],
    pub iowa_group: [String; 3],
    pub pairwise_correlations: CorrelationMatrix,
    /// True when the groups came from an explicit override.
    pub overridden: bool,
}

/// Spread (max - min) and mean of the three pairwise correlations in a triple.
pub fn triple_statistics(corr: &CorrelationMatrix, triple: [usize; 3]) -> (f64, f64) {
    let [a, b, c] = triple;
    let pairs = [corr.get(a, b), corr.get(a, c), corr.get(b, c)];
    let max = pairs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = pairs.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min, pairs.iter().sum::<f64>() / 3.0)
}

/// Choose the DOWA triple.
///
/// Without an override, every 3-subset is scored by the spread of its
/// pairwise correlations; the smallest spread wins, then the higher mean
/// correlation, then the lexicographically first triple. An override names
/// the DOWA triple (3 names) or both triples (6 names, DOWA first).
pub fn plan_grouping(corr: &CorrelationMatrix, override_groups: Option<&[String]>) -> Result<GroupingPlan> {
    corr.validate()?;
    let k = corr.learners.len();
    if k != 6 {
        return Err(Error::Config(format!(
            "grouping needs exactly 6 learners, found {k}"
        )));
    }
    let index_of = |name: &str| -> Result<usize> {
        corr.learners
            .iter()
            .position(|l| l == name)
            .or_else(|| {
                name.parse::<crate::learners::LearnerKind>()
                    .ok()
                    .and_then(|kind| corr.learners.iter().position(|l| l == kind.name()))
            })
            .ok_or_else(|| Error::Config(format!("unknown learner '{name}' in group override")))
    };

    let (dowa, overridden) = match override_groups {
        Some(names) => {
            if names.len() != 3 && names.len() != 6 {
                return Err(Error::Config(format!(
                    "group override must name 3 or 6 learners, got {}",
                    names.len()
                )));
            }
            let idx = names.iter().map(|n| index_of(n)).collect::<Result<Vec<_>>>()?;
            let mut seen = idx.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != idx.len() {
                return Err(Error::Config("group override repeats a learner".into()));
            }
            ([idx[0], idx[1], idx[2]], true)
        }
        None => (best_triple(corr), false),
    };

    let rest: Vec<usize> = (0..6).filter(|i| !dowa.contains(i)).collect();
    let name = |i: usize| corr.learners[i].clone();
    Ok(GroupingPlan {
        dowa_group: dowa.map(name),
        iowa_group: [name(rest[0]), name(rest[1]), name(rest[2])],
        pairwise_correlations: corr.clone(),
        overridden,
    })
}

fn best_triple(corr: &CorrelationMatrix) -> [usize; 3] {
    let mut best: Option<([usize; 3], f64, f64)> = None;
    for a in 0..6 {
        for b in (a + 1)..6 {
            for c in (b + 1)..6 {
                let triple = [a, b, c];
                let (spread, mean) = triple_statistics(corr, triple);
                let better = match best {
                    None => true,
                    Some((_, s, m)) => {
                        spread < s - TIE_TOLERANCE
                            || ((spread - s).abs() <= TIE_TOLERANCE && mean > m + TIE_TOLERANCE)
                    }
                };
                if better {
                    best = Some((triple, spread, mean));
                }
            }
        }
    }
    best.map(|(t, _, _)| t).unwrap_or([0, 1, 2])
}
