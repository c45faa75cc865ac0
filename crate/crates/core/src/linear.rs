//! Multinomial logistic regression trained with mini-batch gradient descent.
//!
//! The objective is mean cross-entropy plus `l2/2 * |W|^2` (bias
//! unregularized), which is convex, so zero initialization is fine. The
//! softmax subtracts the row maximum before exponentiating; overflow is
//! structurally impossible and divergence shows up as a non-finite epoch
//! loss, which training reports as an error instead of returning garbage.
//! A fixed seed fully determines the batch order and therefore the model.

use std::collections::BTreeSet;
use std::fs;
use std::io::BufWriter;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::NUM_CLASSES;
use crate::error::{Error, Result};
use crate::experts::{argmax_row, ProbMatrix};
use crate::persist;

/// Training hyperparameters; the defaults are the ones used throughout the
/// evaluation pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    /// Z-score columns before training; the scaler is stored in the model
    /// and re-applied on prediction.
    pub standardize: bool,
    pub seed: u64,
}

impl Default for LogRegHyper {
    fn default() -> Self {
        LogRegHyper {
            learning_rate: 0.05,
            epochs: 100,
            batch_size: 256,
            l2: 1e-4,
            standardize: true,
            seed: 0,
        }
    }
}

impl LogRegHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epoch count must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::Config(format!("l2 strength {} must be non-negative", self.l2)));
        }
        Ok(())
    }
}

/// Per-column z-score parameters (population standard deviation). Columns
/// with (numerically) zero spread divide by 1 instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: &ArrayView2<f64>) -> Standardizer {
        let mean = x.mean_axis(Axis(0)).expect("non-empty");
        let mean_sq = x.mapv(|v| v * v).mean_axis(Axis(0)).expect("non-empty");
        let std = mean_sq
            .iter()
            .zip(mean.iter())
            .map(|(&m2, &m)| {
                let s = (m2 - m * m).max(0.0).sqrt();
                if s < 1e-12 {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        out -= &self.mean;
        out /= &self.std;
        out
    }
}

/// A trained classifier: class scores are `softmax(x W^T + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    /// `NUM_CLASSES x D`.
    pub weights: Array2<f64>,
    /// Length `NUM_CLASSES`.
    pub bias: Array1<f64>,
    pub l2: f64,
    pub standardizer: Option<Standardizer>,
    /// Full-data loss after each epoch. Not persisted.
    pub training_log: Vec<f64>,
}

/// Row-wise stable softmax, in place.
pub fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

/// Objective value and gradients at `(w, b)` for (already standardized)
/// features `x`: mean cross-entropy plus `l2/2 |w|^2`.
pub fn loss_and_gradient(
    w: &Array2<f64>,
    b: &Array1<f64>,
    x: &ArrayView2<f64>,
    y: &[u8],
    l2: f64,
) -> (f64, Array2<f64>, Array1<f64>) {
    let n = x.nrows();
    debug_assert_eq!(n, y.len());
    let mut p = x.dot(&w.t());
    p += b;
    softmax_rows(&mut p);
    let mut data_loss = 0.0;
    for (mut row, &label) in p.rows_mut().into_iter().zip(y) {
        data_loss -= row[label as usize].ln();
        row[label as usize] -= 1.0;
    }
    let nf = n as f64;
    let reg: f64 = 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    let loss = data_loss / nf + reg;
    let mut grad_w = p.t().dot(x);
    grad_w /= nf;
    grad_w.scaled_add(l2, w);
    let grad_b = p.sum_axis(Axis(0)) / nf;
    (loss, grad_w, grad_b)
}

/// Train on rows of `x` with labels `y`. Requires at least 10 rows and at
/// least two distinct classes; classes absent from `y` simply end up with
/// low scores everywhere.
pub fn logreg_train(x: &ArrayView2<f64>, y: &[u8], hyper: &LogRegHyper) -> Result<LogRegModel> {
    hyper.validate()?;
    let (n, d) = x.dim();
    if y.len() != n {
        return Err(Error::Shape(format!("{n} feature rows but {} labels", y.len())));
    }
    if n < 10 {
        return Err(Error::Config(format!("logreg needs at least 10 rows, got {n}")));
    }
    if let Some((i, &l)) = y.iter().enumerate().find(|(_, &l)| l as usize >= NUM_CLASSES) {
        return Err(Error::Config(format!("label {l} out of range at row {i}")));
    }
    if y.iter().collect::<BTreeSet<_>>().len() < 2 {
        return Err(Error::Config("training labels hold a single class".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("logreg input holds non-finite values".into()));
    }
    let standardizer = hyper.standardize.then(|| Standardizer::fit(x));
    let x_std: Array2<f64> = match &standardizer {
        Some(s) => s.apply(x),
        None => x.to_owned(),
    };
    let mut w = Array2::<f64>::zeros((NUM_CLASSES, d));
    let mut b = Array1::<f64>::zeros(NUM_CLASSES);
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut training_log = Vec::with_capacity(hyper.epochs);
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(hyper.batch_size) {
            let xb = x_std.select(Axis(0), chunk);
            let yb: Vec<u8> = chunk.iter().map(|&i| y[i]).collect();
            let (_, grad_w, grad_b) = loss_and_gradient(&w, &b, &xb.view(), &yb, hyper.l2);
            w.scaled_add(-hyper.learning_rate, &grad_w);
            b.scaled_add(-hyper.learning_rate, &grad_b);
        }
        let (loss, _, _) = loss_and_gradient(&w, &b, &x_std.view(), y, hyper.l2);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("training diverged at epoch {epoch}")));
        }
        training_log.push(loss);
    }
    Ok(LogRegModel { weights: w, bias: b, l2: hyper.l2, standardizer, training_log })
}

impl LogRegModel {
    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Softmax class probabilities for each query row.
    pub fn predict_scores(&self, queries: &ArrayView2<f64>) -> Result<ProbMatrix> {
        if queries.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "logreg fitted on {} columns, queries have {}",
                self.dim(),
                queries.ncols()
            )));
        }
        if queries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("logreg queries hold non-finite values".into()));
        }
        let q_std: Array2<f64>;
        let q = match &self.standardizer {
            Some(s) => {
                q_std = s.apply(queries);
                q_std.view()
            }
            None => queries.view(),
        };
        let mut logits = q.dot(&self.weights.t());
        logits += &self.bias;
        softmax_rows(&mut logits);
        ProbMatrix::new(logits, "logreg", true)
    }

    /// Hard labels: row-wise argmax of [`Self::predict_scores`].
    pub fn predict(&self, queries: &ArrayView2<f64>) -> Result<Vec<u8>> {
        let scores = self.predict_scores(queries)?;
        Ok(scores.scores.rows().into_iter().map(argmax_row).collect())
    }

    /// Binary format: `LRG1` tag, dimension, l2, weights row-major, bias,
    /// then an optional standardizer block, little-endian throughout. The
    /// training log is not persisted.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        persist::write_tag(&mut out, b"LRG1").map_err(io)?;
        persist::write_u64(&mut out, self.dim() as u64).map_err(io)?;
        persist::write_f64(&mut out, self.l2).map_err(io)?;
        persist::write_array2(&mut out, &self.weights).map_err(io)?;
        persist::write_f64_slice(&mut out, self.bias.as_slice().expect("contiguous"))
            .map_err(io)?;
        persist::write_u64(&mut out, self.standardizer.is_some() as u64).map_err(io)?;
        if let Some(s) = &self.standardizer {
            persist::write_f64_slice(&mut out, s.mean.as_slice().expect("contiguous"))
                .map_err(io)?;
            persist::write_f64_slice(&mut out, s.std.as_slice().expect("contiguous"))
                .map_err(io)?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut r = bytes.as_slice();
        persist::read_tag(&mut r, b"LRG1")?;
        let d = persist::read_u64(&mut r)? as usize;
        let l2 = persist::read_f64(&mut r)?;
        let weights = persist::read_array2(&mut r, NUM_CLASSES, d)?;
        let bias = persist::read_array1(&mut r, NUM_CLASSES)?;
        let standardizer = match persist::read_u64(&mut r)? {
            0 => None,
            1 => {
                let mean = persist::read_array1(&mut r, d)?;
                let std = persist::read_array1(&mut r, d)?;
                Some(Standardizer { mean, std })
            }
            other => {
                return Err(Error::Format(format!("bad standardizer flag {other}")));
            }
        };
        persist::expect_eof(&mut r)?;
        Ok(LogRegModel { weights, bias, l2, standardizer, training_log: Vec::new() })
    }
}
