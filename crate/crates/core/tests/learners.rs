use owa_fusion::data::{synth, Dataset, SynthSpec};
use owa_fusion::folds::{split, stratified_folds};
use owa_fusion::learners::*;
use owa_fusion::prediction::{fit_predict_out_of_fold, PredictionMatrix};
use owa_fusion::Error;

fn separable(n: usize, seed: u64) -> Dataset {
    synth(&SynthSpec {
        n_samples: n,
        n_informative: 4,
        n_noise: 2,
        class_separation: 3.0,
        seed,
    })
    .unwrap()
}

#[test]
fn factory_dispatch() {
    for kind in LearnerKind::ALL {
        let model = build(&ClassifierSpec::new(kind, 0)).unwrap();
        assert_eq!(model.kind(), kind);
    }
    let mlp = build(&ClassifierSpec::new(LearnerKind::Mlp, 0).with("hidden_units", 32.0)).unwrap();
    assert_eq!(mlp.hyperparameters()["hidden_units"], 32.0);
    let sgd = build(&ClassifierSpec::new(LearnerKind::Sgd, 0)).unwrap();
    assert_eq!(sgd.hyperparameters()["learning_rate"], 0.01);
    assert_eq!(sgd.hyperparameters()["epochs"], 50.0);
}

#[test]
fn unknown_kind_and_bad_hyperparameters_rejected() {
    assert!(matches!("foo".parse::<LearnerKind>(), Err(Error::Config(_))));
    assert!(serde_json::from_str::<ClassifierSpec>(r#"{"kind": "foo", "seed": 1}"#).is_err());
    let typo = ClassifierSpec::new(LearnerKind::Svm, 0).with("learnin_rate", 0.1);
    assert!(matches!(build(&typo), Err(Error::Config(_))));
    let negative = ClassifierSpec::new(LearnerKind::ExtraTrees, 0).with("n_estimators", -3.0);
    assert!(matches!(build(&negative), Err(Error::Config(_))));
}

#[test]
fn predict_before_fit_fails() {
    for kind in LearnerKind::ALL {
        let model = build(&ClassifierSpec::new(kind, 0)).unwrap();
        assert!(model.predict_proba(&[vec![0.0; 6]]).is_err(), "{kind}");
    }
}

#[test]
fn wrong_width_rows_rejected() {
    let data = separable(100, 1);
    for kind in LearnerKind::ALL {
        let mut model = build(&ClassifierSpec::new(kind, 0)).unwrap();
        model.fit(&data).unwrap();
        assert!(matches!(
            model.predict_proba(&[vec![0.0; 3]]),
            Err(Error::Dimension { .. })
        ));
    }
}

#[test]
fn out_of_fold_accuracy_on_separable_data() {
    let data = separable(600, 2);
    let preds = fit_predict_out_of_fold(&ClassifierSpec::default_roster(3), &data, 5, 4).unwrap();
    preds.check_no_leakage().unwrap();
    for (l, name) in preds.learners.iter().enumerate() {
        let acc = preds.accuracy(l);
        assert!(acc > 0.95, "{name}: {acc}");
    }
    for row in &preds.probs {
        for p in row {
            assert!(p[0] >= 0.0 && p[1] >= 0.0 && (p[0] + p[1] - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn every_learner_beats_a_coin() {
    let data = synth(&SynthSpec {
        n_samples: 400,
        n_informative: 3,
        n_noise: 3,
        class_separation: 1.0,
        seed: 5,
    })
    .unwrap();
    let preds = fit_predict_out_of_fold(&ClassifierSpec::default_roster(5), &data, 4, 5).unwrap();
    for (l, name) in preds.learners.iter().enumerate() {
        assert!(preds.accuracy(l) >= 0.7, "{name}: {}", preds.accuracy(l));
    }
}

#[test]
fn no_signal_gives_prior() {
    let labels: Vec<u8> = (0..400).map(|i| (i % 10 < 3) as u8).collect();
    let rows: Vec<Vec<f64>> = (0..400).map(|_| vec![1.0, 2.0]).collect();
    let data = Dataset::new(vec!["a".into(), "b".into()], rows, labels).unwrap();
    for kind in [
        LearnerKind::Sgd,
        LearnerKind::Svm,
        LearnerKind::Mlp,
        LearnerKind::ExtraTrees,
        LearnerKind::BoostedTrees,
    ] {
        let mut model = build(&ClassifierSpec::new(kind, 1)).unwrap();
        model.fit(&data).unwrap();
        let p = model.predict_proba(&[vec![1.0, 2.0]]).unwrap()[0];
        assert!((p[1] - 0.3).abs() < 0.05, "{kind}: {p:?}");
    }
}

#[test]
fn fitting_is_deterministic() {
    let data = separable(200, 7);
    let rows: Vec<Vec<f64>> = data.rows[..20].to_vec();
    for kind in LearnerKind::ALL {
        let spec = ClassifierSpec::new(kind, 42);
        let mut a = build(&spec).unwrap();
        let mut b = build(&spec).unwrap();
        a.fit(&data).unwrap();
        b.fit(&data).unwrap();
        assert_eq!(a.predict_proba(&rows).unwrap(), b.predict_proba(&rows).unwrap(), "{kind}");
    }
}

#[test]
fn single_class_training_rejected() {
    let data = separable(100, 8);
    let ones: Vec<usize> = (0..100).filter(|&i| data.labels[i] == 1).collect();
    for kind in LearnerKind::ALL {
        let mut model = build(&ClassifierSpec::new(kind, 0)).unwrap();
        assert!(model.fit(&data.subset(&ones)).is_err());
    }
}

#[test]
fn stratified_folds_balance_classes() {
    let labels: Vec<u8> = (0..103).map(|i| (i % 4 == 0) as u8).collect();
    let folds = stratified_folds(&labels, 10, 1).unwrap();
    let mut sizes = [0usize; 10];
    let mut positives = [0usize; 10];
    for (&f, &l) in folds.iter().zip(&labels) {
        sizes[f] += 1;
        positives[f] += l as usize;
    }
    assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    assert!(positives.iter().max().unwrap() - positives.iter().min().unwrap() <= 1);
    let (train, test) = split(&folds, 3);
    assert_eq!(train.len() + test.len(), 103);
    assert!(test.iter().all(|&i| folds[i] == 3));
    assert_eq!(folds, stratified_folds(&labels, 10, 1).unwrap());
}

#[test]
fn stratification_errors() {
    assert!(matches!(stratified_folds(&[0, 1, 0], 1, 0), Err(Error::Config(_))));
    assert!(matches!(stratified_folds(&[0, 1, 0], 5, 0), Err(Error::Stratification(_))));
    // a lone positive leaves its fold's training split without class 1
    let labels = [0, 0, 0, 0, 1, 0];
    assert!(matches!(stratified_folds(&labels, 3, 0), Err(Error::Stratification(_))));
}

#[test]
fn prediction_matrix_csv_round_trip() {
    let data = separable(120, 9);
    let preds = fit_predict_out_of_fold(&ClassifierSpec::default_roster(1), &data, 3, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    preds.write_csv(&path).unwrap();
    let back = PredictionMatrix::read_csv(&path).unwrap();
    assert_eq!(back.learners, preds.learners);
    assert_eq!(back.labels, preds.labels);
    assert_eq!(back.folds, preds.folds);
    assert_eq!(back.probs, preds.probs);
    let header = std::fs::read_to_string(&path).unwrap().lines().next().unwrap().to_string();
    assert!(header.starts_with("sample_id,fold,true_class,boosted_trees_p0,boosted_trees_p1"));
}

#[test]
fn leakage_is_detected() {
    let data = separable(60, 10);
    let mut preds = fit_predict_out_of_fold(&ClassifierSpec::default_roster(1), &data, 3, 2).unwrap();
    let scored = preds.provenance[0].scored_rows[0];
    preds.provenance[0].train_rows.push(scored);
    assert!(matches!(preds.check_no_leakage(), Err(Error::Leakage(_))));
}
