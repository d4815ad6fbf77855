//! Synthetic data through screening, first layer, fusion and metrics.
//!
//!     cargo run --release --example end_to_end -- [seed] [out_dir]

use std::path::PathBuf;
use std::time::Instant;

use owa_fusion::data::{synth, SynthSpec};
use owa_fusion::ensemble::FusionSource;
use owa_fusion::pipeline::{run_experiment, RunConfig};

fn main() -> owa_fusion::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let out_dir = args.next().map(PathBuf::from);

    let data = synth(&SynthSpec {
        n_samples: 5000,
        n_informative: 5,
        n_noise: 15,
        class_separation: 2.0,
        seed,
    })?;
    let config = RunConfig::with_seed(seed);

    let start = Instant::now();
    let experiment = run_experiment(&config, &data)?;
    let elapsed = start.elapsed();

    let report = &experiment.metrics;
    print!("{}", report.render_text());
    println!(
        "ensemble {:.4} vs best learner {:.4}; DOWA {:.2}% IOWA {:.2}%; {:.1}s",
        report.ensemble_accuracy(),
        report.best_first_layer_accuracy(),
        100.0 * report.selection_share(FusionSource::Dowa),
        100.0 * report.selection_share(FusionSource::Iowa),
        elapsed.as_secs_f64()
    );
    if let Some(dir) = out_dir {
        experiment.write_outputs(&dir)?;
        println!("outputs written to {}", dir.display());
    }
    Ok(())
}
