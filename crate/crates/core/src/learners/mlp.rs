//! One-hidden-layer perceptron: tanh hidden units, two-way softmax output,
//! cross-entropy loss, mini-batch gradient descent with momentum.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_fit_data, check_rows, not_fitted, Hyper, LearnerKind, ProbabilisticClassifier};
use crate::data::{Dataset, Standardizer};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Network {
    scaler: Standardizer,
    /// hidden x input
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    /// 2 x hidden
    w2: [Vec<f64>; 2],
    b2: [f64; 2],
}

impl Network {
    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        self.w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| (b + w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()).tanh())
            .collect()
    }

    fn output(&self, h: &[f64]) -> [f64; 2] {
        let z = [0, 1].map(|k| self.b2[k] + self.w2[k].iter().zip(h).map(|(w, v)| w * v).sum::<f64>());
        let m = z[0].max(z[1]);
        let e = [(z[0] - m).exp(), (z[1] - m).exp()];
        let s = e[0] + e[1];
        [e[0] / s, e[1] / s]
    }
}

#[derive(Debug, Clone)]
pub struct Mlp {
    hidden_units: usize,
    learning_rate: f64,
    momentum: f64,
    epochs: usize,
    batch_size: usize,
    l2: f64,
    seed: u64,
    network: Option<Network>,
}

impl Mlp {
    pub(crate) fn from_hyper(hp: &mut Hyper) -> Result<Self> {
        Ok(Self {
            hidden_units: hp.count("hidden_units", 32, 1)?,
            learning_rate: hp.real("learning_rate", 0.01, |v| v > 0.0)?,
            momentum: hp.real("momentum", 0.9, |v| (0.0..1.0).contains(&v))?,
            epochs: hp.count("epochs", 60, 1)?,
            batch_size: hp.count("batch_size", 32, 1)?,
            l2: hp.real("l2", 1e-4, |v| v >= 0.0)?,
            seed: hp.seed(),
            network: None,
        })
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden_units
    }
}

impl ProbabilisticClassifier for Mlp {
    fn kind(&self) -> LearnerKind {
        LearnerKind::Mlp
    }

    fn hyperparameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("hidden_units".into(), self.hidden_units as f64),
            ("learning_rate".into(), self.learning_rate),
            ("momentum".into(), self.momentum),
            ("epochs".into(), self.epochs as f64),
            ("batch_size".into(), self.batch_size as f64),
            ("l2".into(), self.l2),
        ])
    }

    fn fit(&mut self, data: &Dataset) -> Result<()> {
        check_fit_data(data)?;
        let scaler = Standardizer::fit(&data.rows);
        let x = scaler.transform(&data.rows);
        let d = data.n_features();
        let h = self.hidden_units;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let limit1 = (6.0 / (d + h) as f64).sqrt();
        let limit2 = (6.0 / (h + 2) as f64).sqrt();
        let mut net = Network {
            scaler,
            w1: (0..h)
                .map(|_| (0..d).map(|_| rng.gen_range(-limit1..limit1)).collect())
                .collect(),
            b1: vec![0.0; h],
            w2: [0, 1].map(|_| (0..h).map(|_| rng.gen_range(-limit2..limit2)).collect()),
            b2: [0.0; 2],
        };
        let mut v_w1 = vec![vec![0.0; d]; h];
        let mut v_b1 = vec![0.0; h];
        let mut v_w2 = [vec![0.0; h], vec![0.0; h]];
        let mut v_b2 = [0.0; 2];

        let mut order: Vec<usize> = (0..x.len()).collect();
        for _ in 0..self.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(self.batch_size) {
                let mut g_w1 = vec![vec![0.0; d]; h];
                let mut g_b1 = vec![0.0; h];
                let mut g_w2 = [vec![0.0; h], vec![0.0; h]];
                let mut g_b2 = [0.0; 2];
                for &i in batch {
                    let hidden = net.hidden(&x[i]);
                    let p = net.output(&hidden);
                    let y = data.labels[i] as usize;
                    // softmax + cross-entropy: dL/dz_k = p_k - onehot_k
                    let dz = [p[0] - (y == 0) as u8 as f64, p[1] - (y == 1) as u8 as f64];
                    for k in 0..2 {
                        g_b2[k] += dz[k];
                        for j in 0..h {
                            g_w2[k][j] += dz[k] * hidden[j];
                        }
                    }
                    for j in 0..h {
                        let back = dz[0] * net.w2[0][j] + dz[1] * net.w2[1][j];
                        let da = back * (1.0 - hidden[j] * hidden[j]);
                        g_b1[j] += da;
                        for (g, v) in g_w1[j].iter_mut().zip(&x[i]) {
                            *g += da * v;
                        }
                    }
                }
                let scale = 1.0 / batch.len() as f64;
                let (lr, mu, l2) = (self.learning_rate, self.momentum, self.l2);
                for j in 0..h {
                    for (c, w) in net.w1[j].iter_mut().enumerate() {
                        v_w1[j][c] = mu * v_w1[j][c] - lr * (g_w1[j][c] * scale + l2 * *w);
                        *w += v_w1[j][c];
                    }
                    v_b1[j] = mu * v_b1[j] - lr * g_b1[j] * scale;
                    net.b1[j] += v_b1[j];
                }
                for k in 0..2 {
                    for j in 0..h {
                        v_w2[k][j] = mu * v_w2[k][j] - lr * (g_w2[k][j] * scale + l2 * net.w2[k][j]);
                        net.w2[k][j] += v_w2[k][j];
                    }
                    v_b2[k] = mu * v_b2[k] - lr * g_b2[k] * scale;
                    net.b2[k] += v_b2[k];
                }
            }
        }
        if net.b2.iter().chain(&net.b1).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("MLP training diverged".into()));
        }
        self.network = Some(net);
        Ok(())
    }

    fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
        let net = self.network.as_ref().ok_or_else(|| not_fitted(self.kind()))?;
        check_rows(rows, net.w1.first().map_or(0, Vec::len))?;
        Ok(rows
            .iter()
            .map(|r| {
                let x = net.scaler.transform_row(r);
                net.output(&net.hidden(&x))
            })
            .collect())
    }
}
