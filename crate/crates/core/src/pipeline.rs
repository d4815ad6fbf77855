//! End-to-end experiment: screening, out-of-fold first-layer predictions,
//! cross-validated training and evaluation of the fusion stack, metrics.
//!
//! Two cross-validation passes are used. The first produces out-of-fold
//! first-layer probabilities for every sample. The second splits that
//! probability table again; in each arrangement the grouping plan, both
//! IOWA models and the ridge model are fitted on the training folds only
//! and then applied to the held-out fold.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::data::{ingest_csv, CsvSchema, Dataset};
use crate::ensemble::{write_traces_csv, FusionConfig, FusionSource, FusionStack, FusionTrace};
use crate::error::{Error, Result};
use crate::folds;
use crate::learners::{self, ClassifierSpec};
use crate::metrics::{compute_metrics, roc_curve, write_roc_csv, ConfusionCounts, RocPoint, ScalarMetrics};
use crate::prediction::{fit_predict_out_of_fold, FoldProvenance, PredictionMatrix};
use crate::screening::{screen, ForestConfig, ScreeningReport};
use crate::stats::{derive_seed, mean, sample_std};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub label: String,
    pub threshold_percent: f64,
    pub folds: usize,
    pub seed: u64,
    pub forest: ForestConfig,
    pub learners: Vec<ClassifierSpec>,
    pub fusion: FusionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::with_seed(0)
    }
}

impl RunConfig {
    /// Defaults with every component seed derived from `seed`.
    pub fn with_seed(seed: u64) -> Self {
        let mut config = Self {
            data: None,
            label: "Class".into(),
            threshold_percent: 0.5,
            folds: 10,
            seed,
            forest: ForestConfig::default(),
            learners: ClassifierSpec::default_roster(seed),
            fusion: FusionConfig::default(),
        };
        config.reseed(seed);
        config
    }

    /// Replace the master seed and re-derive the component seeds from it.
    pub fn reseed(&mut self, seed: u64) {
        self.seed = seed;
        self.forest.seed = derive_seed(seed, 3);
        self.fusion.iowa.seed = derive_seed(seed, 4);
        for (i, spec) in self.learners.iter_mut().enumerate() {
            spec.seed = derive_seed(seed, 100 + i as u64);
        }
    }

    pub fn first_layer_fold_seed(&self) -> u64 {
        derive_seed(self.seed, 1)
    }

    pub fn second_level_fold_seed(&self) -> u64 {
        derive_seed(self.seed, 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!("fold count must be at least 2, got {}", self.folds)));
        }
        if !(0.0..=100.0).contains(&self.threshold_percent) {
            return Err(Error::Config(format!(
                "screening threshold {} outside [0, 100]",
                self.threshold_percent
            )));
        }
        if self.learners.len() != 6 {
            return Err(Error::Config(format!(
                "the fusion stack needs exactly 6 first-layer learners, got {}",
                self.learners.len()
            )));
        }
        for spec in &self.learners {
            learners::build(spec)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        let path = self
            .data
            .as_ref()
            .ok_or_else(|| Error::Config("no dataset path configured".into()))?;
        ingest_csv(
            path,
            &CsvSchema {
                label: self.label.clone(),
                ..CsvSchema::default()
            },
        )
    }
}

/// Non-deterministic bookkeeping kept apart from the reproducible content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generated_at_unix: u64,
    pub tool_version: String,
}

impl Metadata {
    pub fn now() -> Self {
        Self {
            generated_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n_samples: usize,
    pub confusion: ConfusionCounts,
    pub metrics: ScalarMetrics,
    /// Absent when the held-out fold lacks one of the classes.
    pub auc: Option<f64>,
    pub dowa_group: [String; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation over folds.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub metadata: Metadata,
    pub seed: u64,
    pub config: RunConfig,
    pub n_samples: usize,
    pub retained_features: Vec<String>,
    pub confusion: ConfusionCounts,
    pub pooled: ScalarMetrics,
    pub auc: f64,
    /// `(fpr, tpr)` from the pooled held-out meta-learner scores.
    pub roc_points: Vec<[f64; 2]>,
    pub per_fold: Vec<FoldMetrics>,
    pub mean_and_std: BTreeMap<String, MeanStd>,
    pub first_layer_accuracy: BTreeMap<String, f64>,
    pub selection_counts: BTreeMap<String, usize>,
    pub notes: Vec<String>,
}

impl MetricsReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn ensemble_accuracy(&self) -> f64 {
        self.pooled.accuracy
    }

    pub fn best_first_layer_accuracy(&self) -> f64 {
        self.first_layer_accuracy.values().copied().fold(0.0, f64::max)
    }

    /// Fraction of evaluated samples for which each source was selected.
    pub fn selection_share(&self, source: FusionSource) -> f64 {
        let total: usize = self.selection_counts.values().sum();
        let n = self.selection_counts.get(source.as_str()).copied().unwrap_or(0);
        n as f64 / total.max(1) as f64
    }

    /// Plain-text summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "Evaluated {} samples with {}-fold cross-validation (seed {})\n",
            self.n_samples, self.config.folds, self.seed
        ));
        out.push_str(&format!("Retained features: {}\n\n", self.retained_features.join(", ")));
        out.push_str("Metric        pooled    mean      std\n");
        for name in ScalarMetrics::NAMES {
            let ms = self.mean_and_std.get(name).copied().unwrap_or(MeanStd { mean: 0.0, std: 0.0 });
            out.push_str(&format!(
                "{:<12} {:>8.4} {:>8.4} {:>8.4}\n",
                name,
                self.pooled.get(name).unwrap_or(0.0),
                ms.mean,
                ms.std
            ));
        }
        out.push_str(&format!("{:<12} {:>8.4}\n\n", "auc", self.auc));
        let c = &self.confusion;
        out.push_str(&format!("Confusion: TP {} FP {} TN {} FN {}\n", c.tp, c.fp, c.tn, c.fn_));
        out.push_str("First-layer accuracy:\n");
        for (name, acc) in &self.first_layer_accuracy {
            out.push_str(&format!("  {name:<14} {acc:.4}\n"));
        }
        out.push_str("Selection layer picks:\n");
        for (source, n) in &self.selection_counts {
            out.push_str(&format!("  {source:<5} {n}\n"));
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

/// Trained ensemble: configuration, screening outcome and fitted stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleArtifact {
    pub format_version: u32,
    pub metadata: Metadata,
    pub config: RunConfig,
    pub screening: ScreeningReport,
    pub learners: Vec<ClassifierSpec>,
    pub stack: FusionStack,
}

impl EnsembleArtifact {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let artifact: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: not an ensemble artifact: {e}", path.display())))?;
        if artifact.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "artifact format {} unsupported (expected {FORMAT_VERSION})",
                artifact.format_version
            )));
        }
        Ok(artifact)
    }
}

/// Out-of-fold evaluation of the fusion stack over a prediction matrix.
#[derive(Debug, Clone)]
pub struct FusionEvaluation {
    /// Held-out traces, ordered by row of the prediction matrix.
    pub traces: Vec<FusionTrace>,
    pub folds: Vec<usize>,
    pub per_fold_stacks: Vec<FusionStack>,
    pub provenance: Vec<FoldProvenance>,
}

impl FusionEvaluation {
    pub fn check_no_leakage(&self) -> Result<()> {
        self.provenance.iter().try_for_each(FoldProvenance::check)
    }
}

/// Second-level cross-validation: fit the stack on k-1 folds of the
/// prediction matrix, score the remaining fold.
pub fn cross_validate_fusion(
    preds: &PredictionMatrix,
    config: &FusionConfig,
    k_folds: usize,
    seed: u64,
) -> Result<FusionEvaluation> {
    let fold_of = folds::stratified_folds(&preds.labels, k_folds, seed)?;
    let mut traces: Vec<Option<FusionTrace>> = vec![None; preds.n_samples()];
    let mut stacks = Vec::with_capacity(k_folds);
    let mut provenance = Vec::with_capacity(k_folds);
    for f in 0..k_folds {
        let (train, test) = folds::split(&fold_of, f);
        let stack = FusionStack::fit(&preds.subset(&train), config)?;
        let held_out = stack.apply(&preds.subset(&test))?;
        for (&row, trace) in test.iter().zip(held_out) {
            traces[row] = Some(trace);
        }
        stacks.push(stack);
        provenance.push(FoldProvenance {
            learner: "fusion_stack".into(),
            fold: f,
            train_rows: train,
            scored_rows: test,
        });
    }
    let traces = traces
        .into_iter()
        .map(|t| t.ok_or_else(|| Error::Numeric("a sample was never held out".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok(FusionEvaluation {
        traces,
        folds: fold_of,
        per_fold_stacks: stacks,
        provenance,
    })
}

/// Outcome of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct Experiment {
    pub screening: ScreeningReport,
    pub first_layer: PredictionMatrix,
    pub evaluation: FusionEvaluation,
    pub metrics: MetricsReport,
    pub roc: Vec<RocPoint>,
    pub artifact: EnsembleArtifact,
}

impl Experiment {
    /// Write metrics JSON, ROC CSV, fusion traces, the artifact, the
    /// screening report and the first-layer prediction matrix.
    pub fn write_outputs(&self, out_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        self.metrics.write_json(&out_dir.join("metrics.json"))?;
        write_roc_csv(&self.roc, &out_dir.join("roc.csv"))?;
        write_traces_csv(&self.evaluation.traces, &out_dir.join("fusion_trace.csv"))?;
        self.artifact.write_json(&out_dir.join("ensemble.json"))?;
        self.screening.write_json(&out_dir.join("screening.json"))?;
        self.screening.write_csv(&out_dir.join("screening.csv"))?;
        self.first_layer.write_csv(&out_dir.join("predictions.csv"))
    }
}

/// Screening, then first-layer out-of-fold predictions on the retained
/// features, then the fitted stack on the whole prediction matrix.
pub struct Training {
    pub screening: ScreeningReport,
    pub first_layer: PredictionMatrix,
    pub artifact: EnsembleArtifact,
}

pub fn train(config: &RunConfig, data: &Dataset) -> Result<Training> {
    config.validate()?;
    let screening = screen(data, &config.forest, config.threshold_percent)?;
    let first_layer = first_layer_predictions(config, data, &screening)?;
    let stack = FusionStack::fit(&first_layer, &config.fusion)?;
    let artifact = EnsembleArtifact {
        format_version: FORMAT_VERSION,
        metadata: Metadata::now(),
        config: config.clone(),
        screening: screening.clone(),
        learners: config.learners.clone(),
        stack,
    };
    Ok(Training {
        screening,
        first_layer,
        artifact,
    })
}

fn first_layer_predictions(config: &RunConfig, data: &Dataset, screening: &ScreeningReport) -> Result<PredictionMatrix> {
    if screening.retained.is_empty() {
        return Err(Error::Data(format!(
            "screening at {}% retained no features",
            screening.threshold
        )));
    }
    let projected = data.select_features(&screening.retained)?;
    let preds = fit_predict_out_of_fold(&config.learners, &projected, config.folds, config.first_layer_fold_seed())?;
    preds.check_no_leakage()?;
    Ok(preds)
}

/// Full cross-validated evaluation with screening done on `data` first.
pub fn run_experiment(config: &RunConfig, data: &Dataset) -> Result<Experiment> {
    let training = train(config, data)?;
    evaluate_with(config, training.screening, training.first_layer, training.artifact)
}

/// Cross-validated evaluation reusing a trained artifact's configuration
/// and screening outcome on a (possibly different) dataset.
pub fn evaluate_artifact(artifact: &EnsembleArtifact, data: &Dataset) -> Result<Experiment> {
    let config = &artifact.config;
    config.validate()?;
    let first_layer = first_layer_predictions(config, data, &artifact.screening)?;
    evaluate_with(config, artifact.screening.clone(), first_layer, artifact.clone())
}

fn evaluate_with(
    config: &RunConfig,
    screening: ScreeningReport,
    first_layer: PredictionMatrix,
    artifact: EnsembleArtifact,
) -> Result<Experiment> {
    let evaluation = cross_validate_fusion(&first_layer, &config.fusion, config.folds, config.second_level_fold_seed())?;
    evaluation.check_no_leakage()?;

    let predicted: Vec<u8> = evaluation.traces.iter().map(|t| t.predicted).collect();
    let scores: Vec<f64> = evaluation.traces.iter().map(|t| t.meta_score).collect();
    let labels = &first_layer.labels;
    let confusion = ConfusionCounts::from_predictions(&predicted, labels);
    let pooled = compute_metrics(&confusion)?;
    let (roc, auc) = roc_curve(&scores, labels)?;

    let mut per_fold = Vec::with_capacity(config.folds);
    for (f, stack) in evaluation.per_fold_stacks.iter().enumerate() {
        let rows: Vec<usize> = (0..labels.len()).filter(|&i| evaluation.folds[i] == f).collect();
        let fold_labels: Vec<u8> = rows.iter().map(|&i| labels[i]).collect();
        let fold_pred: Vec<u8> = rows.iter().map(|&i| predicted[i]).collect();
        let fold_scores: Vec<f64> = rows.iter().map(|&i| scores[i]).collect();
        let counts = ConfusionCounts::from_predictions(&fold_pred, &fold_labels);
        per_fold.push(FoldMetrics {
            fold: f,
            n_samples: rows.len(),
            confusion: counts,
            metrics: compute_metrics(&counts)?,
            auc: roc_curve(&fold_scores, &fold_labels).ok().map(|(_, a)| a),
            dowa_group: stack.plan.dowa_group.clone(),
        });
    }
    let mean_and_std = ScalarMetrics::NAMES
        .iter()
        .map(|&name| {
            let values: Vec<f64> = per_fold.iter().filter_map(|f| f.metrics.get(name)).collect();
            (
                name.to_string(),
                MeanStd {
                    mean: mean(&values),
                    std: sample_std(&values),
                },
            )
        })
        .collect();

    let first_layer_accuracy = first_layer
        .learners
        .iter()
        .enumerate()
        .map(|(l, name)| (name.clone(), first_layer.accuracy(l)))
        .collect();
    let mut selection_counts = BTreeMap::from([("DOWA".to_string(), 0), ("IOWA".to_string(), 0)]);
    for t in &evaluation.traces {
        *selection_counts.entry(t.selected.source.as_str().to_string()).or_insert(0) += 1;
    }

    let metrics = MetricsReport {
        metadata: Metadata::now(),
        seed: config.seed,
        config: config.clone(),
        n_samples: labels.len(),
        retained_features: screening.retained.clone(),
        confusion,
        pooled,
        auc,
        roc_points: roc.iter().map(|p| [p.fpr, p.tpr]).collect(),
        per_fold,
        mean_and_std,
        first_layer_accuracy,
        selection_counts,
        notes: vec![
            "feature screening was fitted on the full dataset before cross-validation".into(),
            "std columns are per-fold sample standard deviations".into(),
        ],
    };
    Ok(Experiment {
        screening,
        first_layer,
        evaluation,
        metrics,
        roc,
        artifact,
    })
}
