//! Dependent OWA on a few argument vectors, step by step.
//!
//!     cargo run --example dowa_walkthrough -- 0.9 0.8 0.1

use owa_fusion::owa::{dowa_aggregate, dowa_similarities, dowa_weights, mean_of, ArgumentVector};

fn show(values: Vec<f64>) -> owa_fusion::Result<()> {
    let args = ArgumentVector::new(values)?;
    let ordered = args.ordered();
    println!("arguments   {:?}", args.values());
    println!("ordered     {:?}", ordered.sorted);
    println!("mean        {:.6}", mean_of(&args));
    let sims: Vec<String> = dowa_similarities(&args).iter().map(|s| format!("{s:.4}")).collect();
    println!("similarity  [{}]", sims.join(", "));
    let weights: Vec<String> = dowa_weights(&args).as_slice().iter().map(|w| format!("{w:.4}")).collect();
    println!("weights     [{}]", weights.join(", "));
    println!("aggregate   {:.6}  (plain mean {:.6})\n", dowa_aggregate(&args), mean_of(&args));
    Ok(())
}

fn main() -> owa_fusion::Result<()> {
    let given: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if !given.is_empty() {
        return show(given);
    }
    // the outlier 0.1 is pulled towards the pair that agrees
    show(vec![0.9, 0.8, 0.1])?;
    show(vec![0.55, 0.5, 0.45])?;
    show(vec![0.7, 0.7, 0.7])?;
    show(vec![1.0, 0.0])
}
