use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use owa_fusion::data::{synth, Dataset, SynthSpec};
use owa_fusion::screening::*;
use owa_fusion::Error;

fn synthetic(n: usize, separation: f64, seed: u64) -> Dataset {
    synth(&SynthSpec {
        n_samples: n,
        n_informative: 5,
        n_noise: 15,
        class_separation: separation,
        seed,
    })
    .unwrap()
}

/// Feature 0 decides the label; features 1..4 are noise.
fn separable_by_first(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let label = (i % 2) as u8;
        let mut row = vec![label as f64 * 2.0 - 1.0 + rng.gen_range(-0.4..0.4)];
        row.extend((0..4).map(|_| rng.gen::<f64>()));
        rows.push(row);
        labels.push(label);
    }
    let names = (1..=5).map(|i| format!("V{i}")).collect();
    Dataset::new(names, rows, labels).unwrap()
}

#[test]
fn every_root_splits_on_the_separating_feature() {
    let data = separable_by_first(300, 1);
    let forest = fit_bootstrap_forest(
        &data,
        &ForestConfig {
            features_per_split: Some(5),
            ..ForestConfig::default()
        },
    )
    .unwrap();
    assert_eq!(forest.trees().len(), 100);
    assert!(forest.trees().iter().all(|t| t.root().feature.map(|f| forest.column_of(f)) == Some(0)));
}

#[test]
fn determining_feature_dominates() {
    let data = separable_by_first(500, 2);
    let report = screen(&data, &ForestConfig::default(), 0.5).unwrap();
    assert!(report.contribution("V1").unwrap() > 50.0);
}

#[test]
fn contributions_sum_to_hundred() {
    for seed in 0..3 {
        let data = synthetic(400, 1.5, seed);
        let report = screen(
            &data,
            &ForestConfig {
                n_trees: 20,
                seed,
                ..ForestConfig::default()
            },
            0.5,
        )
        .unwrap();
        let total: f64 = report.features.iter().map(|f| f.contribution_percent).sum();
        assert!((total - 100.0).abs() < 1e-6);
        assert!(report.features.iter().all(|f| f.contribution_percent >= 0.0));
        for f in &report.features {
            assert_eq!(report.retained.contains(&f.name), f.contribution_percent >= 0.5);
        }
    }
}

#[test]
fn single_tree_is_reproducible() {
    let data = synthetic(300, 2.0, 4);
    let config = ForestConfig {
        n_trees: 1,
        features_per_split: Some(20),
        seed: 9,
        ..ForestConfig::default()
    };
    let a = fit_bootstrap_forest(&data, &config).unwrap();
    let b = fit_bootstrap_forest(&data, &config).unwrap();
    assert_eq!(a.trees(), b.trees());
}

#[test]
fn reports_are_deterministic() {
    let data = synthetic(500, 2.0, 5);
    let config = ForestConfig {
        seed: 3,
        ..ForestConfig::default()
    };
    assert_eq!(screen(&data, &config, 0.5).unwrap(), screen(&data, &config, 0.5).unwrap());
}

#[test]
fn threshold_is_monotone() {
    let data = synthetic(500, 1.5, 6);
    let base = screen(&data, &ForestConfig::default(), 0.0).unwrap();
    assert_eq!(base.retained.len(), 20);
    let mut previous = base.retained.len();
    for t in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0] {
        let r = base.with_threshold(t);
        assert!(r.retained.len() <= previous);
        assert!(r.retained.iter().all(|n| base.retained.contains(n)));
        previous = r.retained.len();
    }
}

#[test]
fn column_permutation_permutes_contributions() {
    let data = synthetic(400, 2.0, 7);
    let config = ForestConfig {
        n_trees: 30,
        seed: 11,
        ..ForestConfig::default()
    };
    let base = screen(&data, &config, 0.5).unwrap();
    for seed in 0..3 {
        let perm = random_permutation(20, seed);
        let shuffled = screen(&permute_columns(&data, &perm), &config, 0.5).unwrap();
        for f in &base.features {
            let other = shuffled.contribution(&f.name).unwrap();
            assert!((f.contribution_percent - other).abs() < 1e-9, "{}: {} vs {other}", f.name, f.contribution_percent);
        }
    }
}

#[test]
fn informative_features_retained() {
    let data = synthetic(2000, 2.0, 8);
    let report = screen(&data, &ForestConfig::default(), 0.5).unwrap();
    for i in 1..=5 {
        assert!(report.retained.contains(&format!("V{i}")));
    }
}

#[test]
fn strong_signal_drops_all_noise() {
    let data = synthetic(2000, 3.0, 2024);
    let report = screen(
        &data,
        &ForestConfig {
            seed: 2024,
            ..ForestConfig::default()
        },
        0.5,
    )
    .unwrap();
    let expected: Vec<String> = (1..=5).map(|i| format!("V{i}")).collect();
    assert_eq!(report.retained, expected);
}

#[test]
fn precondition_failures() {
    let data = separable_by_first(10, 0);
    assert!(fit_bootstrap_forest(&data.subset(&[0]), &ForestConfig::default()).is_err());
    assert!(matches!(
        fit_bootstrap_forest(&data.subset(&[0, 2, 4]), &ForestConfig::default()),
        Err(Error::DegenerateLabels(_))
    ));
    assert!(screen(&data, &ForestConfig::default(), -1.0).is_err());
}

#[test]
fn report_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = synthetic(300, 2.0, 10);
    let report = screen(&data, &ForestConfig::default(), 0.5).unwrap();
    let json = dir.path().join("s.json");
    report.write_json(&json).unwrap();
    assert_eq!(ScreeningReport::read_json(&json).unwrap(), report);

    let csv = dir.path().join("s.csv");
    report.write_csv(&csv).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 20);
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
}
