//! Dependent OWA: per-input weights from similarity to the mean.

use super::{ArgumentVector, OwaWeightVector};

/// Arithmetic mean of the arguments.
pub fn mean_of(args: &ArgumentVector) -> f64 {
    args.values().iter().sum::<f64>() / args.len() as f64
}

/// Similarity of each ordered argument to the mean, in rank order.
///
/// `c_j = 1 - |b_j - m| / sum_i |p_i - m|`. When every argument equals the
/// mean the denominator vanishes and all similarities are 1.
pub fn dowa_similarities(args: &ArgumentVector) -> Vec<f64> {
    let m = mean_of(args);
    let ordered = args.ordered();
    let total_deviation: f64 = args.values().iter().map(|p| (p - m).abs()).sum();
    // the computed mean can miss equal arguments by an ulp, so test equality directly
    if args.max() == args.min() || total_deviation == 0.0 {
        return vec![1.0; args.len()];
    }
    ordered
        .sorted
        .iter()
        .map(|b| 1.0 - (b - m).abs() / total_deviation)
        .collect()
}

/// Normalized similarities. Uniform for all-equal input.
pub fn dowa_weights(args: &ArgumentVector) -> OwaWeightVector {
    let similarities = dowa_similarities(args);
    let total: f64 = similarities.iter().sum();
    // n == 1 with zero deviation lands here with total 1.0; a single
    // non-degenerate argument is impossible, so total > 0 always holds.
    OwaWeightVector(similarities.iter().map(|c| c / total).collect())
}

/// DOWA aggregate: weights from [`dowa_weights`] applied to the ordered
/// arguments.
pub fn dowa_aggregate(args: &ArgumentVector) -> f64 {
    let weights = dowa_weights(args);
    let ordered = args.ordered();
    let value = weights.apply_ordered(&ordered.sorted);
    // keep rounding from stepping outside the convex hull
    value.clamp(args.min(), args.max())
}
