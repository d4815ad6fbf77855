//! Learn IOWA weights from observations generated with known weights.
//!
//!     cargo run --release --example iowa_learning -- [n_samples] [seed]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use owa_fusion::owa::{iowa_predict, iowa_train, iowa_weights, ArgumentVector, IowaConfig, IowaTrainingSample};

const TRUE_WEIGHTS: [f64; 3] = [0.6, 0.3, 0.1];

fn main() -> owa_fusion::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(500);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let v: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
        let args = ArgumentVector::new(v)?;
        let target = args.ordered().sorted.iter().zip(TRUE_WEIGHTS).map(|(b, w)| b * w).sum();
        samples.push(IowaTrainingSample::new(args, target)?);
    }

    for tolerance in [1e-6, 0.0] {
        let config = IowaConfig {
            tolerance,
            seed,
            ..IowaConfig::default()
        };
        let model = iowa_train(&samples, &config)?;
        let w = iowa_weights(&model)?;
        println!("tolerance {tolerance:e}: {} epochs, final error {:.3e}", model.epochs_run, model.final_mean_error);
        println!("  weights {:.4?} (generating {TRUE_WEIGHTS:?})", w.as_slice());
        for (epoch, e) in model.error_history.iter().enumerate().filter(|(i, _)| i % 25 == 0) {
            println!("  epoch {:>3}  error {e:.3e}", epoch + 1);
        }
        let probe = ArgumentVector::new(vec![0.2, 0.9, 0.5])?;
        println!("  predict {:?} -> {:.4}\n", probe.values(), iowa_predict(&model, &probe)?);
    }
    Ok(())
}
