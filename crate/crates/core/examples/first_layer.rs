//! Out-of-fold probabilities from the six first-layer learners.
//!
//!     cargo run --release --example first_layer -- [n_samples] [seed]

use std::time::Instant;

use owa_fusion::data::{synth, SynthSpec};
use owa_fusion::ensemble::correlation_matrix;
use owa_fusion::learners::ClassifierSpec;
use owa_fusion::prediction::fit_predict_out_of_fold;

fn main() -> owa_fusion::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_samples: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(11);

    let data = synth(&SynthSpec {
        n_samples,
        n_informative: 5,
        n_noise: 5,
        class_separation: 1.5,
        seed,
    })?;
    let started = Instant::now();
    let preds = fit_predict_out_of_fold(&ClassifierSpec::default_roster(seed), &data, 10, seed)?;
    preds.check_no_leakage()?;
    println!("10-fold out-of-fold fit in {:.1?}", started.elapsed());
    for (l, name) in preds.learners.iter().enumerate() {
        println!("{name:<14} accuracy {:.4}", preds.accuracy(l));
    }

    let corr = correlation_matrix(&preds)?;
    println!("\nclass-1 probability correlations");
    print!("{:<14}", "");
    for name in &corr.learners {
        print!("{:>8}", &name[..name.len().min(7)]);
    }
    println!();
    for (i, name) in corr.learners.iter().enumerate() {
        print!("{name:<14}");
        for j in 0..corr.learners.len() {
            print!("{:>8.3}", corr.get(i, j));
        }
        println!();
    }
    Ok(())
}
