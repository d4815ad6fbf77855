//! Grouping, DOWA/IOWA fusion and per-sample selection on held-out predictions.
//!
//!     cargo run --release --example attention_selection -- [seed]

use owa_fusion::data::{synth, SynthSpec};
use owa_fusion::ensemble::{FusionConfig, FusionSource, FusionStack};
use owa_fusion::folds::{split, stratified_folds};
use owa_fusion::learners::ClassifierSpec;
use owa_fusion::owa::iowa_weights;
use owa_fusion::prediction::fit_predict_out_of_fold;

fn main() -> owa_fusion::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let data = synth(&SynthSpec {
        n_samples: 1500,
        n_informative: 4,
        n_noise: 4,
        class_separation: 1.2,
        seed,
    })?;
    let preds = fit_predict_out_of_fold(&ClassifierSpec::default_roster(seed), &data, 5, seed)?;

    // fit the stack on four fifths of the predictions, apply it to the rest
    let folds = stratified_folds(&preds.labels, 5, seed ^ 0x5eed)?;
    let (fit_rows, held_out) = split(&folds, 0);
    let stack = FusionStack::fit(&preds.subset(&fit_rows), &FusionConfig::default())?;
    println!("DOWA group {:?}", stack.plan.dowa_group);
    println!("IOWA group {:?}", stack.plan.iowa_group);
    for (c, model) in [&stack.iowa.class0, &stack.iowa.class1].iter().enumerate() {
        println!("IOWA class {c} weights {:.4?}", iowa_weights(model)?.as_slice());
    }
    println!("ridge {:.4?} bias {:.4}\n", stack.ridge.coefficients, stack.ridge.bias);

    let traces = stack.apply(&preds.subset(&held_out))?;
    println!("{:>6} {:>15} {:>15} {:>6} {:>8} {:>5}", "id", "dowa (p0,p1)", "iowa (p0,p1)", "pick", "score", "true");
    for t in traces.iter().take(12) {
        println!(
            "{:>6} ({:.3}, {:.3}) ({:.3}, {:.3}) {:>6} {:>8.3} {:>5}",
            t.sample_id,
            t.f_dowa.class0_score,
            t.f_dowa.class1_score,
            t.f_iowa.class0_score,
            t.f_iowa.class1_score,
            t.selected.source.as_str(),
            t.meta_score,
            t.true_class
        );
    }
    let iowa = traces.iter().filter(|t| t.selected.source == FusionSource::Iowa).count();
    let correct = traces.iter().filter(|t| t.predicted == t.true_class).count();
    println!(
        "\n{} held-out samples: IOWA picked {iowa}, DOWA {}; accuracy {:.4}",
        traces.len(),
        traces.len() - iowa,
        correct as f64 / traces.len() as f64
    );
    Ok(())
}
