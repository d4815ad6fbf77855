//! The fusion stack on top of the first-layer learners.
//!
//! Six learners are split into two triples. For every sample the DOWA
//! triple's class-0 and class-1 probabilities are aggregated with the DOWA
//! operator and the IOWA triple's with two learned IOWA models (one per
//! class), giving two fusion vectors. The selection layer keeps whichever
//! vector separates the two classes more, and a ridge classifier makes the
//! final call from that vector.

mod grouping;
mod ridge;

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::owa::{
    dowa_aggregate, iowa_predict, iowa_train, ArgumentVector, IowaConfig, IowaModel, IowaTrainingSample,
};
use crate::prediction::PredictionMatrix;

pub use grouping::{correlation_matrix, plan_grouping, triple_statistics, CorrelationMatrix, GroupingPlan};
pub use ridge::{ridge_fit, ridge_predict, MetaLearner, RidgeClassifier, RidgeModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FusionSource {
    Dowa,
    Iowa,
}

impl FusionSource {
    pub fn as_str(self) -> &'static str {
        match self {
            FusionSource::Dowa => "DOWA",
            FusionSource::Iowa => "IOWA",
        }
    }
}

/// Aggregated class-0 and class-1 scores for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionVector {
    pub class0_score: f64,
    pub class1_score: f64,
    pub source: FusionSource,
}

impl FusionVector {
    pub fn new(class0_score: f64, class1_score: f64, source: FusionSource) -> Result<Self> {
        for v in [class0_score, class1_score] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::Data(format!("fusion score {v} outside [0, 1]")));
            }
        }
        Ok(Self {
            class0_score,
            class1_score,
            source,
        })
    }

    pub fn margin(&self) -> f64 {
        (self.class0_score - self.class1_score).abs()
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.class0_score, self.class1_score]
    }
}

/// Keep the vector with the larger class margin; ties go to DOWA.
pub fn select(f_dowa: FusionVector, f_iowa: FusionVector) -> FusionVector {
    if f_dowa.margin() >= f_iowa.margin() {
        f_dowa
    } else {
        f_iowa
    }
}

/// The two IOWA models, one per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IowaPair {
    pub class0: IowaModel,
    pub class1: IowaModel,
}

impl IowaPair {
    pub fn uniform() -> Self {
        Self {
            class0: IowaModel::uniform(3),
            class1: IowaModel::uniform(3),
        }
    }
}

fn group_indices(preds: &PredictionMatrix, group: &[String; 3]) -> Result<[usize; 3]> {
    let mut out = [0; 3];
    for (slot, name) in out.iter_mut().zip(group) {
        *slot = preds
            .learner_index(name)
            .ok_or_else(|| Error::Config(format!("learner '{name}' missing from prediction matrix")))?;
    }
    Ok(out)
}

fn group_arguments(preds: &PredictionMatrix, row: usize, group: &[usize; 3], class: usize) -> Result<ArgumentVector> {
    ArgumentVector::new(group.iter().map(|&l| preds.probs[row][l][class]).collect())
}

/// `(F_DOWA, F_IOWA)` for every sample. The 2-vectors are not renormalized.
pub fn attention_layer(
    preds: &PredictionMatrix,
    plan: &GroupingPlan,
    iowa_class0: &IowaModel,
    iowa_class1: &IowaModel,
) -> Result<Vec<(FusionVector, FusionVector)>> {
    let dowa = group_indices(preds, &plan.dowa_group)?;
    let iowa = group_indices(preds, &plan.iowa_group)?;
    (0..preds.n_samples())
        .map(|i| {
            let f_dowa = FusionVector::new(
                dowa_aggregate(&group_arguments(preds, i, &dowa, 0)?),
                dowa_aggregate(&group_arguments(preds, i, &dowa, 1)?),
                FusionSource::Dowa,
            )?;
            let f_iowa = FusionVector::new(
                iowa_predict(iowa_class0, &group_arguments(preds, i, &iowa, 0)?)?,
                iowa_predict(iowa_class1, &group_arguments(preds, i, &iowa, 1)?)?,
                FusionSource::Iowa,
            )?;
            Ok((f_dowa, f_iowa))
        })
        .collect()
}

/// IOWA observations for the class-0 and class-1 models: the IOWA triple's
/// class-c probabilities with target 1 when the row's label is c, else 0.
pub fn iowa_training_targets(
    preds: &PredictionMatrix,
    plan: &GroupingPlan,
    labels: &[u8],
) -> Result<[Vec<IowaTrainingSample>; 2]> {
    if labels.len() != preds.n_samples() {
        return Err(Error::Dimension {
            expected: preds.n_samples(),
            actual: labels.len(),
        });
    }
    let iowa = group_indices(preds, &plan.iowa_group)?;
    let mut out = [Vec::with_capacity(labels.len()), Vec::with_capacity(labels.len())];
    for (i, &label) in labels.iter().enumerate() {
        for (class, samples) in out.iter_mut().enumerate() {
            let target = if label as usize == class { 1.0 } else { 0.0 };
            samples.push(IowaTrainingSample::new(group_arguments(preds, i, &iowa, class)?, target)?);
        }
    }
    Ok(out)
}

/// Settings of the trainable part of the fusion stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    pub iowa: IowaConfig,
    pub ridge_lambda: f64,
    /// Manual DOWA triple (or both triples), by learner name.
    pub groups: Option<Vec<String>>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            iowa: IowaConfig::default(),
            ridge_lambda: 1.0,
            groups: None,
        }
    }
}

/// A fitted grouping plan, IOWA pair and ridge meta-learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionStack {
    pub plan: GroupingPlan,
    pub iowa: IowaPair,
    pub ridge: RidgeModel,
}

/// Everything computed for one sample on its way through the stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionTrace {
    pub sample_id: usize,
    pub f_dowa: FusionVector,
    pub f_iowa: FusionVector,
    pub selected: FusionVector,
    pub meta_score: f64,
    pub predicted: u8,
    pub true_class: u8,
}

impl FusionStack {
    /// Fit grouping, both IOWA models and the ridge model on `preds` only.
    pub fn fit(preds: &PredictionMatrix, config: &FusionConfig) -> Result<Self> {
        let corr = correlation_matrix(preds)?;
        let plan = plan_grouping(&corr, config.groups.as_deref())?;
        let [samples0, samples1] = iowa_training_targets(preds, &plan, &preds.labels)?;
        let iowa = IowaPair {
            class0: iowa_train(&samples0, &config.iowa)?,
            class1: iowa_train(&samples1, &config.iowa)?,
        };
        let selected: Vec<[f64; 2]> = attention_layer(preds, &plan, &iowa.class0, &iowa.class1)?
            .into_iter()
            .map(|(d, i)| select(d, i).as_array())
            .collect();
        let ridge = ridge_fit(&selected, &preds.labels, config.ridge_lambda)?;
        Ok(Self { plan, iowa, ridge })
    }

    pub fn apply(&self, preds: &PredictionMatrix) -> Result<Vec<FusionTrace>> {
        let pairs = attention_layer(preds, &self.plan, &self.iowa.class0, &self.iowa.class1)?;
        Ok(pairs
            .into_iter()
            .enumerate()
            .map(|(i, (f_dowa, f_iowa))| {
                let selected = select(f_dowa, f_iowa);
                let meta_score = self.ridge.score(&selected.as_array());
                FusionTrace {
                    sample_id: preds.sample_ids[i],
                    f_dowa,
                    f_iowa,
                    selected,
                    meta_score,
                    predicted: (meta_score >= 0.0) as u8,
                    true_class: preds.labels[i],
                }
            })
            .collect())
    }
}

/// `sample_id,f_dowa_0,f_dowa_1,f_iowa_0,f_iowa_1,source,meta_score,predicted,true`
pub fn write_traces_csv(traces: &[FusionTrace], path: &Path) -> Result<()> {
    let mut out = String::from("sample_id,f_dowa_0,f_dowa_1,f_iowa_0,f_iowa_1,source,meta_score,predicted,true\n");
    for t in traces {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            t.sample_id,
            t.f_dowa.class0_score,
            t.f_dowa.class1_score,
            t.f_iowa.class0_score,
            t.f_iowa.class1_score,
            t.selected.source.as_str(),
            t.meta_score,
            t.predicted,
            t.true_class
        ));
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
