//! Out-of-fold first-layer probabilities and their CSV interchange format.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::folds;
use crate::learners::{build, ClassifierSpec};

/// Which rows trained the model that scored which rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldProvenance {
    pub learner: String,
    pub fold: usize,
    pub train_rows: Vec<usize>,
    pub scored_rows: Vec<usize>,
}

impl FoldProvenance {
    /// Fails when any scored row was also a training row.
    pub fn check(&self) -> Result<()> {
        let train: BTreeSet<usize> = self.train_rows.iter().copied().collect();
        match self.scored_rows.iter().find(|r| train.contains(r)) {
            Some(r) => Err(Error::Leakage(format!(
                "{} fold {}: row {r} was scored by a model trained on it",
                self.learner, self.fold
            ))),
            None => Ok(()),
        }
    }
}

/// `N x K` table of `[p0, p1]` pairs, one column pair per learner.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    pub learners: Vec<String>,
    pub sample_ids: Vec<usize>,
    pub folds: Vec<usize>,
    pub labels: Vec<u8>,
    /// `probs[sample][learner]`
    pub probs: Vec<Vec<[f64; 2]>>,
    pub provenance: Vec<FoldProvenance>,
}

impl PredictionMatrix {
    pub fn n_samples(&self) -> usize {
        self.probs.len()
    }

    pub fn learner_index(&self, name: &str) -> Option<usize> {
        self.learners.iter().position(|l| l == name)
    }

    /// Class-`class` probabilities of one learner over all samples.
    pub fn column(&self, learner: usize, class: usize) -> Vec<f64> {
        self.probs.iter().map(|row| row[learner][class]).collect()
    }

    pub fn subset(&self, rows: &[usize]) -> PredictionMatrix {
        PredictionMatrix {
            learners: self.learners.clone(),
            sample_ids: rows.iter().map(|&i| self.sample_ids[i]).collect(),
            folds: rows.iter().map(|&i| self.folds[i]).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            probs: rows.iter().map(|&i| self.probs[i].clone()).collect(),
            provenance: Vec::new(),
        }
    }

    /// Fraction of samples whose argmax class (ties to class 1) matches the label.
    pub fn accuracy(&self, learner: usize) -> f64 {
        let hits = self
            .probs
            .iter()
            .zip(&self.labels)
            .filter(|(row, &y)| ((row[learner][1] >= row[learner][0]) as u8) == y)
            .count();
        hits as f64 / self.n_samples().max(1) as f64
    }

    pub fn check_no_leakage(&self) -> Result<()> {
        self.provenance.iter().try_for_each(FoldProvenance::check)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.probs.len();
        if self.labels.len() != n || self.folds.len() != n || self.sample_ids.len() != n {
            return Err(Error::Data("prediction matrix columns have unequal lengths".into()));
        }
        for (i, row) in self.probs.iter().enumerate() {
            if row.len() != self.learners.len() {
                return Err(Error::Dimension {
                    expected: self.learners.len(),
                    actual: row.len(),
                });
            }
            for p in row.iter().flatten() {
                if !p.is_finite() || !(0.0..=1.0).contains(p) {
                    return Err(Error::Data(format!(
                        "sample {} has probability {p} outside [0, 1]",
                        self.sample_ids[i]
                    )));
                }
            }
        }
        Ok(())
    }

    /// `sample_id,fold,true_class,<learner>_p0,<learner>_p1,...`
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("sample_id,fold,true_class");
        for l in &self.learners {
            out.push_str(&format!(",{l}_p0,{l}_p1"));
        }
        out.push('\n');
        for i in 0..self.n_samples() {
            out.push_str(&format!("{},{},{}", self.sample_ids[i], self.folds[i], self.labels[i]));
            for p in &self.probs[i] {
                out.push_str(&format!(",{},{}", p[0], p[1]));
            }
            out.push('\n');
        }
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("prediction CSV lacks column '{name}'")))
        };
        let (id_col, fold_col, label_col) = (find("sample_id")?, find("fold")?, find("true_class")?);
        let mut learners = Vec::new();
        let mut pairs = Vec::new();
        for (j, h) in header.iter().enumerate() {
            if let Some(name) = h.strip_suffix("_p0") {
                let p1 = find(&format!("{name}_p1"))?;
                learners.push(name.to_string());
                pairs.push((j, p1));
            }
        }
        if learners.is_empty() {
            return Err(Error::Schema("prediction CSV has no <learner>_p0 columns".into()));
        }

        let mut m = PredictionMatrix {
            learners,
            sample_ids: Vec::new(),
            folds: Vec::new(),
            labels: Vec::new(),
            probs: Vec::new(),
            provenance: Vec::new(),
        };
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let row_no = i + 1;
            let cell = |j: usize| -> Result<f64> {
                let raw = record.get(j).unwrap_or("").trim();
                raw.parse::<f64>().map_err(|_| Error::NonNumeric {
                    row: row_no,
                    column: header[j].clone(),
                    value: raw.to_string(),
                })
            };
            let integer = |j: usize| -> Result<usize> {
                let raw = record.get(j).unwrap_or("").trim();
                raw.parse::<usize>().map_err(|_| Error::NonNumeric {
                    row: row_no,
                    column: header[j].clone(),
                    value: raw.to_string(),
                })
            };
            m.sample_ids.push(integer(id_col)?);
            m.folds.push(integer(fold_col)?);
            let label = integer(label_col).ok().filter(|&l| l <= 1).ok_or_else(|| Error::LabelDomain {
                row: row_no,
                value: record.get(label_col).unwrap_or("").to_string(),
            })?;
            m.labels.push(label as u8);
            m.probs.push(
                pairs
                    .iter()
                    .map(|&(a, b)| Ok([cell(a)?, cell(b)?]))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        if m.probs.is_empty() {
            return Err(Error::EmptyFile(path.to_path_buf()));
        }
        m.validate()?;
        Ok(m)
    }
}

/// Score every sample with each learner trained without the sample's fold.
///
/// Learners and folds are fitted in parallel; results are assembled in
/// learner then fold order, so the output does not depend on scheduling.
pub fn fit_predict_out_of_fold(
    specs: &[ClassifierSpec],
    data: &Dataset,
    k_folds: usize,
    seed: u64,
) -> Result<PredictionMatrix> {
    if specs.is_empty() {
        return Err(Error::Config("no first-layer learners configured".into()));
    }
    data.require_both_classes()?;
    for spec in specs {
        build(spec)?;
    }
    let fold_of = folds::stratified_folds(&data.labels, k_folds, seed)?;
    let n = data.n_samples();

    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|l| (0..k_folds).map(move |f| (l, f)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(l, f)| {
            let (train, test) = folds::split(&fold_of, f);
            let mut model = build(&specs[l])?;
            model.fit(&data.subset(&train))?;
            let test_rows: Vec<Vec<f64>> = test.iter().map(|&i| data.rows[i].clone()).collect();
            let probs = model.predict_proba(&test_rows)?;
            Ok((train, test, probs))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut probs = vec![vec![[f64::NAN; 2]; specs.len()]; n];
    let mut provenance = Vec::with_capacity(jobs.len());
    for (&(l, f), (train, test, p)) in jobs.iter().zip(results) {
        for (&i, pr) in test.iter().zip(&p) {
            probs[i][l] = *pr;
        }
        provenance.push(FoldProvenance {
            learner: specs[l].kind.name().to_string(),
            fold: f,
            train_rows: train,
            scored_rows: test,
        });
    }
    let matrix = PredictionMatrix {
        learners: specs.iter().map(|s| s.kind.name().to_string()).collect(),
        sample_ids: (0..n).collect(),
        folds: fold_of,
        labels: data.labels.clone(),
        probs,
        provenance,
    };
    matrix.validate()?;
    Ok(matrix)
}
