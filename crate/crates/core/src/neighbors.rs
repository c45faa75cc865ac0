//! Exact k-nearest-neighbor classification, plus a nearest-class-centroid
//! variant.
//!
//! Neighbor search is brute force over all training rows. Distances are
//! computed blockwise through the expansion
//! `|q - t|^2 = |q|^2 + |t|^2 - 2 q.t`, whose cross term is one matrix
//! product per query block, with negatives from cancellation clamped to
//! zero. The query blocks are walked serially and rows within a block are
//! scored in parallel, so results never depend on thread count. All ties
//! are broken deterministically: equal distances prefer the lower training
//! index, equal votes prefer the lower class index.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use crate::dataset::NUM_CLASSES;
use crate::error::{Error, Result};
use crate::experts::{argmax_row, ProbMatrix};

/// Additive stabilizer for inverse-distance weights, `w = 1/(d + eps)`.
pub const INVERSE_DISTANCE_EPSILON: f64 = 1e-12;

/// Query rows processed per distance block; fixed so blocking never changes
/// results or memory use.
const QUERY_BLOCK: usize = 512;

/// How neighbor labels are converted into class scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoteRule {
    /// Each neighbor contributes 1/k to its class.
    Uniform,
    /// Each neighbor contributes `1/(distance + eps)`, normalized to sum 1.
    InverseDistance,
}

/// A fitted (i.e. memorized) nearest-neighbor classifier.
#[derive(Debug, Clone)]
pub struct KnnModel {
    train: Array2<f64>,
    train_sq_norms: Array1<f64>,
    labels: Vec<u8>,
    pub k: usize,
    pub vote: VoteRule,
}

fn check_features(name: &str, x: &ArrayView2<f64>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("{name} features hold non-finite values")));
    }
    Ok(())
}

fn check_labels(labels: &[u8], rows: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::Shape(format!("{rows} feature rows but {} labels", labels.len())));
    }
    if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l as usize >= NUM_CLASSES) {
        return Err(Error::Config(format!("label {l} out of range at row {i}")));
    }
    Ok(())
}

/// Store the training set by value and validate the hyperparameters.
pub fn knn_fit(features: Array2<f64>, labels: Vec<u8>, k: usize, vote: VoteRule) -> Result<KnnModel> {
    if features.nrows() == 0 {
        return Err(Error::Config("knn with an empty training set".into()));
    }
    check_labels(&labels, features.nrows())?;
    if k == 0 || k > features.nrows() {
        return Err(Error::Config(format!(
            "k = {k} not in 1..={} training rows",
            features.nrows()
        )));
    }
    check_features("training", &features.view())?;
    let train_sq_norms = features.rows().into_iter().map(|r| r.dot(&r)).collect();
    Ok(KnnModel { train: features, train_sq_norms, labels, k, vote })
}

impl KnnModel {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.train.ncols()
    }

    /// Class scores for each query row (rows sum to 1).
    pub fn predict_scores(&self, queries: &ArrayView2<f64>) -> Result<ProbMatrix> {
        if queries.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "knn fitted on {} columns, queries have {}",
                self.dim(),
                queries.ncols()
            )));
        }
        check_features("query", queries)?;
        let mut scores = Array2::zeros((queries.nrows(), NUM_CLASSES));
        for (bi, block) in queries.axis_chunks_iter(Axis(0), QUERY_BLOCK).enumerate() {
            let start = bi * QUERY_BLOCK;
            let cross = block.dot(&self.train.t());
            let mut out = scores.slice_mut(ndarray::s![start..start + block.nrows(), ..]);
            Zip::from(out.rows_mut())
                .and(cross.rows())
                .and(block.rows())
                .par_for_each(|mut out_row, cross_row, q| {
                    let q_norm = q.dot(&q);
                    let mut cand: Vec<(f64, usize)> = cross_row
                        .iter()
                        .enumerate()
                        .map(|(j, &g)| {
                            ((q_norm + self.train_sq_norms[j] - 2.0 * g).max(0.0).sqrt(), j)
                        })
                        .collect();
                    let by_distance_then_index = |a: &(f64, usize), b: &(f64, usize)| {
                        a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1))
                    };
                    if self.k < cand.len() {
                        cand.select_nth_unstable_by(self.k - 1, by_distance_then_index);
                    }
                    let neighbors = &mut cand[..self.k];
                    neighbors.sort_unstable_by(by_distance_then_index);
                    let mut votes = [0.0f64; NUM_CLASSES];
                    match self.vote {
                        VoteRule::Uniform => {
                            for &(_, j) in neighbors.iter() {
                                votes[self.labels[j] as usize] += 1.0;
                            }
                        }
                        VoteRule::InverseDistance => {
                            for &(d, j) in neighbors.iter() {
                                votes[self.labels[j] as usize] +=
                                    1.0 / (d + INVERSE_DISTANCE_EPSILON);
                            }
                        }
                    }
                    let total: f64 = votes.iter().sum();
                    for (dst, v) in out_row.iter_mut().zip(votes) {
                        *dst = v / total;
                    }
                });
        }
        ProbMatrix::new(scores, "knn", true)
    }

    /// Hard labels: row-wise argmax of [`Self::predict_scores`].
    pub fn predict(&self, queries: &ArrayView2<f64>) -> Result<Vec<u8>> {
        let scores = self.predict_scores(queries)?;
        Ok(scores.scores.rows().into_iter().map(argmax_row).collect())
    }
}

/// Euclidean distance matrix (`queries.nrows() x train.nrows()`) via the
/// blocked norm expansion used by [`KnnModel::predict_scores`].
pub fn pairwise_distances(queries: &ArrayView2<f64>, train: &ArrayView2<f64>) -> Result<Array2<f64>> {
    if queries.ncols() != train.ncols() {
        return Err(Error::Shape(format!(
            "queries have {} columns, train has {}",
            queries.ncols(),
            train.ncols()
        )));
    }
    check_features("query", queries)?;
    check_features("training", train)?;
    let train_sq_norms: Vec<f64> = train.rows().into_iter().map(|r| r.dot(&r)).collect();
    let mut out = Array2::zeros((queries.nrows(), train.nrows()));
    for (bi, block) in queries.axis_chunks_iter(Axis(0), QUERY_BLOCK).enumerate() {
        let start = bi * QUERY_BLOCK;
        let cross = block.dot(&train.t());
        let mut out_block = out.slice_mut(ndarray::s![start..start + block.nrows(), ..]);
        Zip::from(out_block.rows_mut()).and(cross.rows()).and(block.rows()).for_each(
            |mut out_row, cross_row, q| {
                let q_norm = q.dot(&q);
                for ((dst, &g), &t_norm) in
                    out_row.iter_mut().zip(cross_row.iter()).zip(&train_sq_norms)
                {
                    *dst = (q_norm + t_norm - 2.0 * g).max(0.0).sqrt();
                }
            },
        );
    }
    Ok(out)
}

/// Reference distance computation: explicit difference vectors, no algebraic
/// expansion. Quadratic and slow; used to cross-check the blocked path.
pub fn pairwise_distances_naive(
    queries: &ArrayView2<f64>,
    train: &ArrayView2<f64>,
) -> Result<Array2<f64>> {
    if queries.ncols() != train.ncols() {
        return Err(Error::Shape(format!(
            "queries have {} columns, train has {}",
            queries.ncols(),
            train.ncols()
        )));
    }
    check_features("query", queries)?;
    check_features("training", train)?;
    let mut out = Array2::zeros((queries.nrows(), train.nrows()));
    for (i, q) in queries.rows().into_iter().enumerate() {
        for (j, t) in train.rows().into_iter().enumerate() {
            let mut acc = 0.0;
            for (a, b) in q.iter().zip(t.iter()) {
                let d = a - b;
                acc += d * d;
            }
            out[(i, j)] = acc.sqrt();
        }
    }
    Ok(out)
}

/// Nearest-class-centroid classifier: one prototype per class.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    /// `NUM_CLASSES x D`, row `c` is the mean of class `c`'s training rows.
    pub centroids: Array2<f64>,
}

/// Average the training rows of every class. All ten classes must appear.
pub fn centroid_fit(features: &ArrayView2<f64>, labels: &[u8]) -> Result<CentroidModel> {
    if features.nrows() == 0 {
        return Err(Error::Config("centroid fit with an empty training set".into()));
    }
    check_labels(labels, features.nrows())?;
    check_features("training", features)?;
    let mut centroids = Array2::<f64>::zeros((NUM_CLASSES, features.ncols()));
    let mut counts = [0usize; NUM_CLASSES];
    for (row, &l) in features.rows().into_iter().zip(labels) {
        let mut c = centroids.row_mut(l as usize);
        c += &row;
        counts[l as usize] += 1;
    }
    for (c, &count) in counts.iter().enumerate() {
        if count == 0 {
            return Err(Error::Config(format!("class {c} has no training samples")));
        }
        let mut row = centroids.row_mut(c);
        row /= count as f64;
    }
    Ok(CentroidModel { centroids })
}

impl CentroidModel {
    pub fn dim(&self) -> usize {
        self.centroids.ncols()
    }

    /// Inverse-distance scores against the ten centroids (rows sum to 1).
    pub fn predict_scores(&self, queries: &ArrayView2<f64>) -> Result<ProbMatrix> {
        let distances = pairwise_distances(queries, &self.centroids.view())?;
        let mut scores = distances;
        for mut row in scores.rows_mut() {
            row.mapv_inplace(|d| 1.0 / (d + INVERSE_DISTANCE_EPSILON));
            let total = row.sum();
            row /= total;
        }
        ProbMatrix::new(scores, "centroid", true)
    }

    /// The class of the closest centroid for each query.
    pub fn predict(&self, queries: &ArrayView2<f64>) -> Result<Vec<u8>> {
        let scores = self.predict_scores(queries)?;
        Ok(scores.scores.rows().into_iter().map(argmax_row).collect())
    }
}
