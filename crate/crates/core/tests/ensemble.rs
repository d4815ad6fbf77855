use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use owa_fusion::ensemble::*;
use owa_fusion::owa::{IowaConfig, IowaModel};
use owa_fusion::prediction::PredictionMatrix;
use owa_fusion::Error;

const NAMES: [&str; 6] = ["boosted_trees", "sgd", "extra_trees", "adaboost", "svm", "mlp"];

fn matrix(probs: Vec<Vec<[f64; 2]>>, labels: Vec<u8>) -> PredictionMatrix {
    let n = probs.len();
    PredictionMatrix {
        learners: NAMES.map(String::from).to_vec(),
        sample_ids: (0..n).collect(),
        folds: vec![0; n],
        labels,
        probs,
        provenance: vec![],
    }
}

fn p(p1: f64) -> [f64; 2] {
    [1.0 - p1, p1]
}

fn corr_from(values: Vec<Vec<f64>>) -> CorrelationMatrix {
    CorrelationMatrix {
        learners: NAMES.map(String::from).to_vec(),
        values,
        zero_variance: vec![],
    }
}

/// Noisy copies of the label at varying quality.
fn noisy_matrix(n: usize, seed: u64) -> PredictionMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let probs = labels
        .iter()
        .map(|&y| {
            (0..6)
                .map(|l| {
                    let noise = 0.15 + 0.05 * l as f64;
                    let v: f64 = y as f64 * 0.6 + 0.2 + rng.gen_range(-noise..noise);
                    p(v.clamp(0.0, 1.0))
                })
                .collect()
        })
        .collect();
    matrix(probs, labels)
}

#[test]
fn duplicated_learner_correlates_perfectly() {
    let mut preds = noisy_matrix(200, 1);
    for row in preds.probs.iter_mut() {
        row[1] = row[0];
    }
    let c = correlation_matrix(&preds).unwrap();
    assert!((c.get(0, 1) - 1.0).abs() < 1e-12);
    assert!((0..6).all(|i| c.get(i, i) == 1.0));
    c.validate().unwrap();
}

#[test]
fn independent_columns_barely_correlate() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let probs = (0..10_000).map(|_| (0..6).map(|_| p(rng.gen())).collect()).collect();
    let labels = (0..10_000).map(|i| (i % 2) as u8).collect();
    let c = correlation_matrix(&matrix(probs, labels)).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            if i != j {
                assert!(c.get(i, j).abs() < 0.05);
            }
        }
    }
}

#[test]
fn constant_column_is_flagged() {
    let mut preds = noisy_matrix(50, 3);
    for row in preds.probs.iter_mut() {
        row[4] = p(0.5);
    }
    let c = correlation_matrix(&preds).unwrap();
    assert_eq!(c.zero_variance, vec!["svm".to_string()]);
    assert!((0..6).filter(|&j| j != 4).all(|j| c.get(4, j) == 0.0));
    assert_eq!(c.get(4, 4), 1.0);
}

fn brute_force_group(c: &CorrelationMatrix) -> [usize; 3] {
    let mut triples = Vec::new();
    for a in 0..6 {
        for b in a + 1..6 {
            for d in b + 1..6 {
                let pairs = [c.get(a, b), c.get(a, d), c.get(b, d)];
                let spread = pairs.iter().cloned().fold(f64::MIN, f64::max) - pairs.iter().cloned().fold(f64::MAX, f64::min);
                triples.push(([a, b, d], spread, pairs.iter().sum::<f64>() / 3.0));
            }
        }
    }
    triples.sort_by(|x, y| x.1.total_cmp(&y.1).then(y.2.total_cmp(&x.2)));
    triples[0].0
}

#[test]
fn tight_triple_wins() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut v = vec![vec![0.0; 6]; 6];
    for i in 0..6 {
        v[i][i] = 1.0;
        for j in i + 1..6 {
            let x = rng.gen_range(-0.9..0.9);
            v[i][j] = x;
            v[j][i] = x;
        }
    }
    // sgd, adaboost, mlp at (0.70, 0.69, 0.68); every other triple is spread out
    let set = |v: &mut Vec<Vec<f64>>, a: usize, b: usize, x: f64| {
        v[a][b] = x;
        v[b][a] = x;
    };
    set(&mut v, 1, 3, 0.70);
    set(&mut v, 1, 5, 0.69);
    set(&mut v, 3, 5, 0.68);
    for (a, b, x) in [(0, 1, -0.5), (0, 2, 0.3), (0, 3, 0.9), (0, 4, -0.2), (0, 5, 0.1), (1, 2, 0.95), (1, 4, -0.6),
                      (2, 3, -0.4), (2, 4, 0.5), (2, 5, -0.1), (3, 4, 0.2), (4, 5, 0.99)] {
        set(&mut v, a, b, x);
    }
    let c = corr_from(v);
    assert_eq!(brute_force_group(&c), [1, 3, 5]);
    let plan = plan_grouping(&c, None).unwrap();
    assert_eq!(plan.dowa_group, ["sgd", "adaboost", "mlp"].map(String::from));
    assert_eq!(plan.iowa_group, ["boosted_trees", "extra_trees", "svm"].map(String::from));
    assert!(!plan.overridden);
}

#[test]
fn equal_correlations_choose_first_triple() {
    let mut v = vec![vec![0.4; 6]; 6];
    (0..6).for_each(|i| v[i][i] = 1.0);
    let plan = plan_grouping(&corr_from(v), None).unwrap();
    assert_eq!(plan.dowa_group, ["boosted_trees", "sgd", "extra_trees"].map(String::from));
}

#[test]
fn explicit_override() {
    let mut v = vec![vec![0.4; 6]; 6];
    (0..6).for_each(|i| v[i][i] = 1.0);
    let c = corr_from(v);
    let plan = plan_grouping(&c, Some(&["BT", "ET", "AB"].map(String::from))).unwrap();
    assert_eq!(plan.dowa_group, ["boosted_trees", "extra_trees", "adaboost"].map(String::from));
    assert!(plan.overridden);
    let six = ["sgd", "svm", "mlp", "boosted_trees", "extra_trees", "adaboost"].map(String::from);
    let plan = plan_grouping(&c, Some(&six)).unwrap();
    assert_eq!(plan.dowa_group, ["sgd", "svm", "mlp"].map(String::from));
    for bad in [vec!["BT", "ET"], vec!["BT", "ET", "ET"], vec!["BT", "ET", "zz"]] {
        let bad: Vec<String> = bad.into_iter().map(String::from).collect();
        assert!(matches!(plan_grouping(&c, Some(&bad)), Err(Error::Config(_))));
    }
}

proptest! {
    #[test]
    fn grouping_follows_relabeling(seed in any::<u64>(), perm_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = vec![vec![1.0; 6]; 6];
        for i in 0..6 {
            for j in i + 1..6 {
                let x = rng.gen_range(-1.0..1.0);
                v[i][j] = x;
                v[j][i] = x;
            }
        }
        let c = corr_from(v.clone());
        let plan = plan_grouping(&c, None).unwrap();

        let perm = owa_fusion::screening::random_permutation(6, perm_seed);
        // learner at new position k is old learner perm[k]
        let mut relabeled = corr_from((0..6).map(|i| (0..6).map(|j| v[perm[i]][perm[j]]).collect()).collect());
        relabeled.learners = perm.iter().map(|&k| NAMES[k].to_string()).collect();
        let plan2 = plan_grouping(&relabeled, None).unwrap();
        let mut a = plan.dowa_group.to_vec();
        let mut b = plan2.dowa_group.to_vec();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn attention_outputs_bounded(seed in any::<u64>()) {
        let preds = noisy_matrix(30, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m0 = IowaModel::from_betas((0..3).map(|_| rng.gen_range(-4.0..4.0)).collect());
        let m1 = IowaModel::from_betas((0..3).map(|_| rng.gen_range(-4.0..4.0)).collect());
        let plan = plan_grouping(&correlation_matrix(&preds).unwrap(), None).unwrap();
        for (d, i) in attention_layer(&preds, &plan, &m0, &m1).unwrap() {
            for v in d.as_array().into_iter().chain(i.as_array()) {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let s = select(d, i);
            prop_assert!(s == d || s == i);
            let loser = if s == d { i } else { d };
            prop_assert!(s.margin() >= loser.margin());
        }
    }

    #[test]
    fn identical_learners_agree_under_uniform_iowa(v in prop::collection::vec(0.0f64..=1.0, 1..20)) {
        let probs: Vec<Vec<[f64; 2]>> = v.iter().map(|&x| vec![p(x); 6]).collect();
        let labels = (0..v.len()).map(|i| (i % 2) as u8).collect();
        let preds = matrix(probs, labels);
        let mut c = vec![vec![0.3; 6]; 6];
        (0..6).for_each(|i| c[i][i] = 1.0);
        let plan = plan_grouping(&corr_from(c), None).unwrap();
        let u = IowaModel::uniform(3);
        for (d, i) in attention_layer(&preds, &plan, &u, &u).unwrap() {
            prop_assert!((d.class0_score - i.class0_score).abs() < 1e-9);
            prop_assert!((d.class1_score - i.class1_score).abs() < 1e-9);
        }
    }
}

fn default_plan() -> GroupingPlan {
    let mut v = vec![vec![0.4; 6]; 6];
    (0..6).for_each(|i| v[i][i] = 1.0);
    plan_grouping(&corr_from(v), None).unwrap()
}

#[test]
fn attention_examples() {
    // DOWA triple is columns 0..3 (BT, SGD, ET), IOWA triple is AB, SVM, MLP
    let plan = default_plan();
    let u = IowaModel::uniform(3);
    let certain = matrix(vec![vec![[1.0, 0.0]; 6]], vec![0]);
    let (d, i) = attention_layer(&certain, &plan, &u, &u).unwrap()[0];
    assert_eq!(d.as_array(), [1.0, 0.0]);
    assert_eq!(i.as_array(), [1.0, 0.0]);

    let preds = matrix(vec![vec![p(0.9), p(0.8), p(0.1), p(0.2), p(0.5), p(0.8)]], vec![1]);
    let (d, i) = attention_layer(&preds, &plan, &u, &u).unwrap()[0];
    assert!((d.class1_score - 0.66).abs() < 1e-12);
    assert!((i.class1_score - 0.5).abs() < 1e-12);
    assert_eq!((d.source, i.source), (FusionSource::Dowa, FusionSource::Iowa));
}

#[test]
fn iowa_targets_are_one_hot() {
    let preds = noisy_matrix(40, 5);
    let plan = default_plan();
    let [s0, s1] = iowa_training_targets(&preds, &plan, &preds.labels).unwrap();
    assert_eq!((s0.len(), s1.len()), (40, 40));
    for (k, &y) in preds.labels.iter().enumerate() {
        assert_eq!(s1[k].target, y as f64);
        assert_eq!(s0[k].target, 1.0 - y as f64);
        assert_eq!(s1[k].arguments.values()[0], preds.probs[k][3][1]);
    }
    assert!(matches!(
        iowa_training_targets(&preds, &plan, &preds.labels[..10]),
        Err(Error::Dimension { .. })
    ));
}

#[test]
fn selection_examples() {
    let v = |a, b, s| FusionVector::new(a, b, s).unwrap();
    use FusionSource::*;
    assert_eq!(select(v(0.9, 0.1, Dowa), v(0.6, 0.4, Iowa)).source, Dowa);
    assert_eq!(select(v(0.75, 0.25, Dowa), v(0.25, 0.75, Iowa)).source, Dowa);
    assert_eq!(select(v(0.5, 0.5, Dowa), v(0.0, 1.0, Iowa)).source, Iowa);
    assert!(FusionVector::new(1.2, 0.0, Dowa).is_err());
}

#[test]
fn ridge_symmetric_pair() {
    let m = ridge_fit(&[[0.0, 1.0], [1.0, 0.0]], &[1, 0], 1.0).unwrap();
    assert!((m.coefficients[0] + 0.5).abs() < 1e-12);
    assert!((m.coefficients[1] - 0.5).abs() < 1e-12);
    assert!(m.bias.abs() < 1e-12);
    // boundary at class0 == class1, which scores 0 and goes to class 1
    assert_eq!(m.score(&[0.3, 0.3]), 0.0);
    let out = ridge_predict(&m, &[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.4, 0.4]]).unwrap();
    assert_eq!(out.iter().map(|o| o.0).collect::<Vec<_>>(), vec![1, 0, 1]);
}

#[test]
fn ridge_separable_and_limits() {
    let labels: Vec<u8> = (0..30).map(|i| (i % 3 == 0) as u8).collect();
    let features: Vec<[f64; 2]> = labels.iter().map(|&y| if y == 1 { [0.0, 1.0] } else { [1.0, 0.0] }).collect();
    let m = ridge_fit(&features, &labels, 1.0).unwrap();
    for (x, &y) in features.iter().zip(&labels) {
        assert_eq!((m.score(x) >= 0.0) as u8, y);
    }
    let heavy = ridge_fit(&features, &labels, 1e12).unwrap();
    assert!(heavy.coefficients.iter().all(|c| c.abs() < 1e-9));
    assert!(features.iter().all(|x| heavy.score(x) < 0.0), "majority class is 0");

    let flipped = RidgeModel {
        coefficients: [-m.coefficients[0], -m.coefficients[1]],
        bias: -m.bias,
        ridge_lambda: 1.0,
    };
    for x in &features {
        assert_ne!((m.score(x) >= 0.0), (flipped.score(x) >= 0.0));
    }
}

#[test]
fn ridge_errors() {
    assert!(matches!(ridge_fit(&[[0.0, 1.0], [1.0, 0.0]], &[1, 0], 0.0), Err(Error::Config(_))));
    assert!(matches!(ridge_fit(&[[f64::NAN, 1.0], [1.0, 0.0]], &[1, 0], 1.0), Err(Error::Data(_))));
    let m = ridge_fit(&[[0.0, 1.0], [1.0, 0.0]], &[1, 0], 1.0).unwrap();
    assert!(matches!(ridge_predict(&m, &[vec![1.0]]), Err(Error::Dimension { .. })));
}

#[test]
fn stack_fit_is_deterministic_and_serializable() {
    let preds = noisy_matrix(300, 6);
    let config = FusionConfig {
        iowa: IowaConfig {
            seed: 3,
            ..IowaConfig::default()
        },
        ..FusionConfig::default()
    };
    let a = FusionStack::fit(&preds, &config).unwrap();
    let b = FusionStack::fit(&preds, &config).unwrap();
    assert_eq!(a, b);
    let json = serde_json::to_string(&a).unwrap();
    let back: FusionStack = serde_json::from_str(&json).unwrap();
    assert_eq!(back, a);
    let traces = a.apply(&preds).unwrap();
    assert_eq!(traces, back.apply(&preds).unwrap());
    let correct = traces.iter().filter(|t| t.predicted == t.true_class).count();
    assert!(correct as f64 / 300.0 > 0.9);
    for t in &traces {
        assert_eq!(t.selected, select(t.f_dowa, t.f_iowa));
    }
}
