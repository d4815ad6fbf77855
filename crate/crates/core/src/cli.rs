//! Command-line surface. The binary is a thin wrapper over [`run`].

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{ingest_csv, synth, write_csv, CsvSchema, SynthSpec};
use crate::ensemble::write_traces_csv;
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, ConfusionCounts};
use crate::pipeline::{evaluate_artifact, train, EnsembleArtifact, MetricsReport, RunConfig};
use crate::prediction::PredictionMatrix;
use crate::screening::screen;

#[derive(Debug, Parser)]
#[command(name = "owa-fusion", version, about = "DOWA/IOWA fusion ensemble for binary classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank features with a bootstrap forest and drop weak contributors.
    Screen(RunArgs),
    /// Screen, fit first-layer learners out of fold and fit the fusion stack.
    Train(RunArgs),
    /// Cross-validated metrics for a trained artifact on a dataset.
    Evaluate(EvaluateArgs),
    /// Apply a trained fusion stack to an external prediction-matrix CSV.
    Fuse(FuseArgs),
    /// Write a synthetic two-class Gaussian mixture CSV.
    Synth(SynthArgs),
    /// Render a metrics JSON file as text.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Label column name (default "Class").
    #[arg(long)]
    pub label: Option<String>,
    /// JSON run configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Screening threshold in percent.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Manual DOWA group, comma-separated learner names.
    #[arg(long)]
    pub groups: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    /// Dataset to evaluate on (defaults to the artifact's training data).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    /// Prediction matrix CSV: sample_id, fold, true_class, <learner>_p0, <learner>_p1...
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5000)]
    pub samples: usize,
    #[arg(long, default_value_t = 5)]
    pub informative: usize,
    #[arg(long, default_value_t = 15)]
    pub noise: usize,
    #[arg(long, default_value_t = 2.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub metrics: PathBuf,
    /// Write the summary here instead of returning it for stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse arguments and execute one command. Returns text for stdout.
pub fn run<I, T>(args: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    execute(cli.command)
}

pub fn execute(command: Command) -> Result<String> {
    match command {
        Command::Screen(args) => cmd_screen(&args),
        Command::Train(args) => cmd_train(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Fuse(args) => cmd_fuse(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Report(args) => cmd_report(&args),
    }
}

/// Config file first, then flags on top.
pub fn resolve_config(args: &RunArgs) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.reseed(seed);
    }
    if let Some(data) = &args.data {
        config.data = Some(data.clone());
    }
    if let Some(label) = &args.label {
        config.label = label.clone();
    }
    if let Some(folds) = args.folds {
        config.folds = folds;
    }
    if let Some(threshold) = args.threshold {
        config.threshold_percent = threshold;
    }
    if let Some(groups) = &args.groups {
        config.fusion.groups = Some(groups.split(',').map(|g| g.trim().to_string()).collect());
    }
    config.validate()?;
    Ok(config)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_matrix_csv(names: &[String], values: &[Vec<f64>], path: &Path) -> Result<()> {
    let mut out = String::from("feature");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (name, row) in names.iter().zip(values) {
        out.push_str(name);
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

fn cmd_screen(args: &RunArgs) -> Result<String> {
    let config = resolve_config(args)?;
    let data = config.load_dataset()?;
    let report = screen(&data, &config.forest, config.threshold_percent)?;
    create_dir(&args.out_dir)?;
    report.write_json(&args.out_dir.join("screening.json"))?;
    report.write_csv(&args.out_dir.join("screening.csv"))?;
    write_matrix_csv(
        &data.feature_names,
        &data.feature_correlations(),
        &args.out_dir.join("feature_correlations.csv"),
    )?;
    Ok(format!(
        "retained {} of {} features at {}%: {}\n",
        report.retained.len(),
        data.n_features(),
        report.threshold,
        report.retained.join(", ")
    ))
}

fn cmd_train(args: &RunArgs) -> Result<String> {
    let config = resolve_config(args)?;
    let data = config.load_dataset()?;
    let training = train(&config, &data)?;
    create_dir(&args.out_dir)?;
    training.artifact.write_json(&args.out_dir.join("ensemble.json"))?;
    training.screening.write_json(&args.out_dir.join("screening.json"))?;
    training.screening.write_csv(&args.out_dir.join("screening.csv"))?;
    training.first_layer.write_csv(&args.out_dir.join("predictions.csv"))?;
    let plan = &training.artifact.stack.plan;
    Ok(format!(
        "trained on {} samples; DOWA group [{}], IOWA group [{}]; artifact {}\n",
        data.n_samples(),
        plan.dowa_group.join(", "),
        plan.iowa_group.join(", "),
        args.out_dir.join("ensemble.json").display()
    ))
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<String> {
    if !args.artifact.is_file() {
        return Err(Error::Config(format!("artifact {} not found", args.artifact.display())));
    }
    let artifact = EnsembleArtifact::read_json(&args.artifact)?;
    let mut config = artifact.config.clone();
    if let Some(data) = &args.data {
        config.data = Some(data.clone());
    }
    if let Some(label) = &args.label {
        config.label = label.clone();
    }
    let data = config.load_dataset()?;
    let experiment = evaluate_artifact(&artifact, &data)?;
    experiment.write_outputs(&args.out_dir)?;
    let m = &experiment.metrics;
    Ok(format!(
        "accuracy {:.4}, auc {:.4}, mcc {:.4}; reports in {}\n",
        m.pooled.accuracy,
        m.auc,
        m.pooled.mcc,
        args.out_dir.display()
    ))
}

fn cmd_fuse(args: &FuseArgs) -> Result<String> {
    if !args.artifact.is_file() {
        return Err(Error::Config(format!("artifact {} not found", args.artifact.display())));
    }
    let artifact = EnsembleArtifact::read_json(&args.artifact)?;
    let preds = PredictionMatrix::read_csv(&args.predictions)?;
    let traces = artifact.stack.apply(&preds)?;
    create_dir(&args.out_dir)?;
    write_traces_csv(&traces, &args.out_dir.join("fusion_trace.csv"))?;
    let predicted: Vec<u8> = traces.iter().map(|t| t.predicted).collect();
    let counts = ConfusionCounts::from_predictions(&predicted, &preds.labels);
    let accuracy = compute_metrics(&counts)?.accuracy;
    Ok(format!(
        "fused {} samples (accuracy against true_class {:.4}); traces in {}\n",
        traces.len(),
        accuracy,
        args.out_dir.join("fusion_trace.csv").display()
    ))
}

fn cmd_synth(args: &SynthArgs) -> Result<String> {
    let data = synth(&SynthSpec {
        n_samples: args.samples,
        n_informative: args.informative,
        n_noise: args.noise,
        class_separation: args.separation,
        seed: args.seed,
    })?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_csv(&data, &args.out)?;
    // read back through the ingestion path so the file is known to load
    ingest_csv(&args.out, &CsvSchema::default())?;
    Ok(format!("wrote {} samples to {}\n", data.n_samples(), args.out.display()))
}

fn cmd_report(args: &ReportArgs) -> Result<String> {
    let report = MetricsReport::read_json(&args.metrics)?;
    let text = report.render_text();
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Error::io(path, e))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
