//! Rank features of a synthetic set by bootstrap-forest contribution.
//!
//!     cargo run --release --example feature_screening -- [separation] [seed] [n_samples]

use owa_fusion::data::{synth, SynthSpec};
use owa_fusion::screening::{screen, ForestConfig};

fn main() -> owa_fusion::Result<()> {
    let mut args = std::env::args().skip(1);
    let separation: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2024);
    let n_samples: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);

    // V1..V5 carry the signal, V6..V20 are noise
    let data = synth(&SynthSpec {
        n_samples,
        n_informative: 5,
        n_noise: 15,
        class_separation: separation,
        seed,
    })?;
    let config = ForestConfig {
        seed,
        ..ForestConfig::default()
    };
    let report = screen(&data, &config, 0.5)?;

    println!("{:<6} {:>9}", "name", "percent");
    for f in report.ranked() {
        let mark = if report.retained.contains(&f.name) { "" } else { "  dropped" };
        println!("{:<6} {:>9.4}{mark}", f.name, f.contribution_percent);
    }
    let dropped_noise = data.feature_names[5..]
        .iter()
        .filter(|n| !report.retained.contains(n))
        .count();
    println!("retained {:?}; noise dropped {dropped_noise}/15", report.retained);
    Ok(())
}
