//! Tabular binary-classification data: ingestion, synthesis, scaling.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Feature matrix plus binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let d = feature_names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Data(format!(
                    "row {i} has {} values, expected {d}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    row: i,
                    column: feature_names[j].clone(),
                });
            }
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::LabelDomain {
                row: i,
                value: labels[i].to_string(),
            });
        }
        Ok(Self {
            feature_names,
            rows,
            labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Number of samples in class 0 and class 1.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    pub fn require_both_classes(&self) -> Result<()> {
        let [zeros, ones] = self.class_counts();
        if zeros == 0 || ones == 0 {
            return Err(Error::DegenerateLabels(format!(
                "need both classes, found {zeros} negatives and {ones} positives"
            )));
        }
        Ok(())
    }

    /// Rows at the given indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Keep only the named feature columns, in the order given.
    pub fn select_features(&self, names: &[String]) -> Result<Dataset> {
        let columns = names
            .iter()
            .map(|name| {
                self.feature_names
                    .iter()
                    .position(|f| f == name)
                    .ok_or_else(|| Error::Schema(format!("feature '{name}' not in dataset")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            feature_names: names.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|row| columns.iter().map(|&j| row[j]).collect())
                .collect(),
            labels: self.labels.clone(),
        })
    }

    /// Column-major copy of the feature matrix.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_features())
            .map(|j| self.rows.iter().map(|r| r[j]).collect())
            .collect()
    }

    /// Pearson correlation between every pair of feature columns.
    /// Constant columns correlate 0 with everything but themselves.
    pub fn feature_correlations(&self) -> Vec<Vec<f64>> {
        let cols = self.columns();
        crate::stats::correlation_matrix(&cols).0
    }
}

/// How to locate the label column when reading a CSV.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub label: String,
    /// Column dropped from the features when present.
    pub id_column: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            label: "Class".into(),
            id_column: "id".into(),
        }
    }
}

/// Read a CSV with a header row into a [`Dataset`].
///
/// Every column other than the id and label columns becomes a feature.
pub fn ingest_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let header: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    let label_col = header
        .iter()
        .position(|h| h == &schema.label)
        .ok_or_else(|| {
            Error::Schema(format!(
                "label column '{}' not found in header of {}",
                schema.label,
                path.display()
            ))
        })?;
    let id_col = header
        .iter()
        .position(|h| h.eq_ignore_ascii_case(&schema.id_column));
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&j| j != label_col && Some(j) != id_col)
        .collect();
    let feature_names = feature_cols.iter().map(|&j| header[j].clone()).collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // data rows are numbered from 1, matching a spreadsheet view below the header
        let row_no = i + 1;
        let mut row = Vec::with_capacity(feature_cols.len());
        for &j in &feature_cols {
            let cell = record.get(j).unwrap_or("").trim();
            let value: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row: row_no,
                column: header[j].clone(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    row: row_no,
                    column: header[j].clone(),
                });
            }
            row.push(value);
        }
        let raw_label = record.get(label_col).unwrap_or("").trim();
        let label = match raw_label.parse::<f64>() {
            Ok(v) if v == 0.0 => 0,
            Ok(v) if v == 1.0 => 1,
            _ => {
                return Err(Error::LabelDomain {
                    row: row_no,
                    value: raw_label.to_string(),
                })
            }
        };
        rows.push(row);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Dataset::new(feature_names, rows, labels)
}

/// Parameters of the two-class Gaussian mixture used for desk-scale runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n_samples: usize,
    pub n_informative: usize,
    pub n_noise: usize,
    /// Mean offset of every informative feature between the two classes.
    pub class_separation: f64,
    pub seed: u64,
}

/// Draw a balanced two-class Gaussian mixture.
///
/// Informative features are `N(0, 1)` for class 0 and
/// `N(class_separation, 1)` for class 1; noise features are `N(0, 1)`
/// regardless of class. Informative columns come first (`V1..`).
pub fn synth(spec: &SynthSpec) -> Result<Dataset> {
    if spec.n_samples < 10 {
        return Err(Error::Config(format!(
            "n_samples must be at least 10, got {}",
            spec.n_samples
        )));
    }
    if spec.n_informative + spec.n_noise == 0 {
        return Err(Error::Config("need at least one feature".into()));
    }
    if !spec.class_separation.is_finite() {
        return Err(Error::Config("class separation must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels: Vec<u8> = (0..spec.n_samples).map(|i| (i % 2) as u8).collect();
    labels.shuffle(&mut rng);
    let d = spec.n_informative + spec.n_noise;
    let rows = labels
        .iter()
        .map(|&y| {
            (0..d)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    if j < spec.n_informative && y == 1 {
                        z + spec.class_separation
                    } else {
                        z
                    }
                })
                .collect()
        })
        .collect();
    let names = (1..=d).map(|j| format!("V{j}")).collect();
    Dataset::new(names, rows, labels)
}

/// Write a dataset in the ingestion layout: `id, <features...>, Class`.
pub fn write_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("id");
    for name in &data.feature_names {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",Class\n");
    for (i, (row, label)) in data.rows.iter().zip(&data.labels).enumerate() {
        out.push_str(&i.to_string());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push(',');
        out.push_str(&label.to_string());
        out.push('\n');
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Per-column standardization with statistics taken from one split only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; d];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; d];
        for row in rows {
            for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
                *s += (v - m).powi(2);
            }
        }
        let scales = vars
            .into_iter()
            .map(|v| {
                let sd = (v / n).sqrt();
                // constant columns pass through centered but unscaled
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { means, scales }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_validation() {
        let names = vec!["a".to_string()];
        assert!(Dataset::new(names.clone(), vec![vec![1.0]], vec![2]).is_err());
        assert!(Dataset::new(names.clone(), vec![vec![f64::NAN]], vec![0]).is_err());
        assert!(Dataset::new(names.clone(), vec![vec![1.0, 2.0]], vec![0]).is_err());
        assert!(Dataset::new(names, vec![vec![1.0]], vec![1]).is_ok());
    }

    #[test]
    fn standardizer_uses_given_rows() {
        let s = Standardizer::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        assert_eq!(s.transform_row(&[2.0, 5.0]), vec![0.0, 0.0]);
        assert_eq!(s.transform_row(&[3.0, 6.0]), vec![1.0, 1.0]);
    }

    #[test]
    fn synth_is_balanced_and_deterministic() {
        let spec = SynthSpec {
            n_samples: 101,
            n_informative: 2,
            n_noise: 3,
            class_separation: 1.0,
            seed: 4,
        };
        let a = synth(&spec).unwrap();
        let b = synth(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.class_counts(), [51, 50]);
        assert_eq!(a.feature_names, vec!["V1", "V2", "V3", "V4", "V5"]);
        assert!(synth(&SynthSpec { n_samples: 9, ..spec }).is_err());
    }
}
