//! Seeded stratified k-fold assignment.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Assign every sample to one of `k` folds so each fold holds close to
/// `1/k` of each class. Classes are shuffled with `seed` and dealt round
/// robin; the deal for class 1 continues where class 0 stopped so fold
/// sizes differ by at most one.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config(format!("fold count must be at least 2, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::Stratification(format!(
            "{} samples cannot fill {k} folds",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[i] = next % k;
            next += 1;
        }
    }
    check_training_splits(labels, &folds, k)?;
    Ok(folds)
}

/// Every training split (all folds but one) must contain both classes.
pub fn check_training_splits(labels: &[u8], folds: &[usize], k: usize) -> Result<()> {
    let mut per_fold = vec![[0usize; 2]; k];
    for (&l, &f) in labels.iter().zip(folds) {
        per_fold[f][l as usize] += 1;
    }
    let totals = [0, 1].map(|c| per_fold.iter().map(|p| p[c]).sum::<usize>());
    for (f, counts) in per_fold.iter().enumerate() {
        for c in 0..2 {
            if totals[c] == counts[c] {
                return Err(Error::Stratification(format!(
                    "training split for fold {f} has no samples of class {c}"
                )));
            }
        }
    }
    Ok(())
}

/// `(train, test)` row indices for one fold.
pub fn split(folds: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    (0..folds.len()).partition(|&i| folds[i] != fold)
}
