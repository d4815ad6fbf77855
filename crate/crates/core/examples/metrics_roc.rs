//! Confusion counts, scalar metrics and the ROC curve for a noisy scorer.
//!
//!     cargo run --example metrics_roc -- [noise] [roc.csv]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use owa_fusion::metrics::{compute_metrics, roc_curve, write_roc_csv, ConfusionCounts};

fn main() -> owa_fusion::Result<()> {
    let mut args = std::env::args().skip(1);
    let noise: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.8);
    let out = args.next();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let labels: Vec<u8> = (0..400).map(|i| (i % 3 == 0) as u8).collect();
    let scores: Vec<f64> = labels
        .iter()
        .map(|&y| y as f64 * 2.0 - 1.0 + noise * rng.gen_range(-1.5..1.5))
        .collect();

    let predicted: Vec<u8> = scores.iter().map(|&s| (s >= 0.0) as u8).collect();
    let counts = ConfusionCounts::from_predictions(&predicted, &labels);
    println!("tp {} fp {} tn {} fn {}", counts.tp, counts.fp, counts.tn, counts.fn_);
    let m = compute_metrics(&counts)?;
    println!(
        "accuracy {:.4} precision {:.4} sensitivity {:.4} specificity {:.4} f1 {:.4} mcc {:.4}",
        m.accuracy, m.precision, m.sensitivity, m.specificity, m.f1, m.mcc
    );

    let (points, auc) = roc_curve(&scores, &labels)?;
    println!("auc {auc:.4} over {} points", points.len());
    let step = (points.len() / 10).max(1);
    for p in points.iter().step_by(step) {
        println!("  threshold {:>8.3}  fpr {:.3}  tpr {:.3}", p.threshold, p.fpr, p.tpr);
    }
    if let Some(path) = out {
        write_roc_csv(&points, path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
