//! Principal component analysis via eigendecomposition of the sample
//! covariance (divisor `N - 1`).
//!
//! Two fitting routes produce the same model: when the feature count is at
//! most the row count the `D x D` covariance is decomposed directly;
//! otherwise the `N x N` Gram matrix of the centered rows is decomposed and
//! its eigenvectors are mapped back to feature space. Components are unit
//! length, mutually orthogonal, sorted by descending eigenvalue, and sign
//! normalized so each component's largest-magnitude entry is positive.

use std::fs;
use std::io::BufWriter;
use std::ops::Range;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::persist;

/// Which variance mass a fraction is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceDenominator {
    /// Sum of the eigenvalues kept in the model.
    Retained,
    /// Trace of the full covariance, including discarded directions.
    Total,
}

/// A fitted PCA basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// Column means of the training data, length `D`.
    pub mean: Array1<f64>,
    /// `K x D`; row `i` is the component with the `i`-th largest eigenvalue.
    pub components: Array2<f64>,
    /// Descending, clamped to be non-negative, length `K`.
    pub eigenvalues: Array1<f64>,
    /// Trace of the training covariance (sum over all `D` directions).
    pub total_variance: f64,
}

/// Relative eigenvalue threshold below which a Gram-route direction is
/// treated as null and replaced by an orthonormal completion vector.
const NULL_SPACE_RTOL: f64 = 1e-10;

/// Fit a `k`-component model on the rows of `x`.
pub fn pca_fit(x: &ArrayView2<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(Error::Config(format!("pca needs at least 2 rows, got {n}")));
    }
    if k == 0 || k > n.min(d) {
        return Err(Error::Config(format!(
            "component count {k} not in 1..=min(rows, dims) = {}",
            n.min(d)
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("pca input holds non-finite values".into()));
    }
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let model = if d <= n {
        fit_covariance_route(x, &mean, k)?
    } else {
        fit_gram_route(x, &mean, k)?
    };
    Ok(model)
}

/// Decompose the `D x D` covariance, formed from raw moments so no centered
/// copy of the data is materialized.
fn fit_covariance_route(x: &ArrayView2<f64>, mean: &Array1<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = x.dim();
    let nf = n as f64;
    let mut cov = x.t().dot(x);
    let outer = mean
        .view()
        .insert_axis(Axis(1))
        .dot(&mean.view().insert_axis(Axis(0)));
    cov -= &(outer * nf);
    cov /= nf - 1.0;
    let cov = (&cov + &cov.t()) * 0.5;
    let total_variance = cov.diag().sum();
    let (vals, vecs) = cov
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Numeric(format!("pca eigendecomposition failed: {e}")))?;
    let mut eigenvalues = Array1::zeros(k);
    let mut components = Array2::zeros((k, d));
    for i in 0..k {
        let src = d - 1 - i; // eigh returns ascending order
        eigenvalues[i] = vals[src].max(0.0);
        components.row_mut(i).assign(&vecs.column(src));
    }
    normalize_signs(&mut components);
    Ok(PcaModel { mean: mean.clone(), components, eigenvalues, total_variance })
}

/// Decompose the `N x N` Gram matrix of the centered rows (`N < D`). Shared
/// eigenvalues with the covariance; feature-space eigenvectors are recovered
/// as `X_c^T v / |X_c^T v|`. Directions with (numerically) zero eigenvalue
/// get deterministic orthonormal completion vectors instead.
fn fit_gram_route(x: &ArrayView2<f64>, mean: &Array1<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = x.dim();
    let nf = n as f64;
    let centered = x - mean;
    let gram = centered.dot(&centered.t()) / (nf - 1.0);
    let gram = (&gram + &gram.t()) * 0.5;
    let total_variance = gram.diag().sum();
    let (vals, vecs) = gram
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Numeric(format!("pca eigendecomposition failed: {e}")))?;
    let max_val = vals[n - 1].max(0.0);
    let tol = max_val * NULL_SPACE_RTOL;
    let mut eigenvalues = Array1::zeros(k);
    let mut components = Array2::zeros((k, d));
    for i in 0..k {
        let src = n - 1 - i;
        let val = vals[src].max(0.0);
        eigenvalues[i] = val;
        if val > tol {
            let u = centered.t().dot(&vecs.column(src));
            let norm = u.dot(&u).sqrt();
            components.row_mut(i).assign(&(&u / norm));
        } else {
            let filler = complete_orthonormal(&components.slice(ndarray::s![..i, ..]))?;
            components.row_mut(i).assign(&filler);
        }
    }
    normalize_signs(&mut components);
    Ok(PcaModel { mean: mean.clone(), components, eigenvalues, total_variance })
}

/// Find a unit vector orthogonal to every row of `basis`, scanning canonical
/// basis vectors in index order and Gram-Schmidt projecting twice.
fn complete_orthonormal(basis: &ArrayView2<f64>) -> Result<Array1<f64>> {
    let d = basis.ncols();
    for j in 0..d {
        let mut candidate = Array1::zeros(d);
        candidate[j] = 1.0;
        for _ in 0..2 {
            for row in basis.rows() {
                let proj = row.dot(&candidate);
                candidate.scaled_add(-proj, &row);
            }
        }
        let norm = candidate.dot(&candidate).sqrt();
        if norm > 0.5 {
            return Ok(candidate / norm);
        }
    }
    Err(Error::Numeric("could not complete an orthonormal basis".into()))
}

/// Flip any component whose largest-magnitude entry (first such index on
/// ties) is negative.
fn normalize_signs(components: &mut Array2<f64>) {
    for mut row in components.rows_mut() {
        let mut best = 0;
        for (j, v) in row.iter().enumerate() {
            if v.abs() > row[best].abs() {
                best = j;
            }
        }
        if row[best] < 0.0 {
            row *= -1.0;
        }
    }
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.components.ncols()
    }

    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    /// Project rows onto the retained components: `(x - mean) C^T`,
    /// evaluated as `x C^T - mean C^T` so the mean row maps to exact zeros.
    pub fn transform(&self, x: &ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "pca fitted on {} columns, input has {}",
                self.dim(),
                x.ncols()
            )));
        }
        let mut z = x.dot(&self.components.t());
        let offset = self.mean.dot(&self.components.t());
        z -= &offset;
        Ok(z)
    }

    /// Map component scores back to feature space: `z C + mean`.
    pub fn inverse_transform(&self, z: &ArrayView2<f64>) -> Result<Array2<f64>> {
        if z.ncols() != self.k() {
            return Err(Error::Shape(format!(
                "model keeps {} components, scores have {} columns",
                self.k(),
                z.ncols()
            )));
        }
        let mut x = z.dot(&self.components);
        x += &self.mean;
        Ok(x)
    }

    /// Fraction of variance carried by the half-open component range
    /// `components.start..components.end`.
    pub fn explained_variance_fraction(
        &self,
        components: Range<usize>,
        denominator: VarianceDenominator,
    ) -> Result<f64> {
        if components.start > components.end || components.end > self.k() {
            return Err(Error::Config(format!(
                "component range {}..{} invalid for a {}-component model",
                components.start,
                components.end,
                self.k()
            )));
        }
        let numerator: f64 = self.eigenvalues.slice(ndarray::s![components]).sum();
        let denom = match denominator {
            VarianceDenominator::Retained => self.eigenvalues.sum(),
            VarianceDenominator::Total => self.total_variance,
        };
        if denom <= 0.0 {
            return Err(Error::Numeric("variance denominator is not positive".into()));
        }
        Ok(numerator / denom)
    }

    /// Restrict the model to its first `k` components. Transforming with the
    /// result equals taking the first `k` columns of the full transform.
    pub fn truncated(&self, k: usize) -> Result<PcaModel> {
        if k == 0 || k > self.k() {
            return Err(Error::Config(format!(
                "cannot truncate a {}-component model to {k}",
                self.k()
            )));
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            components: self.components.slice(ndarray::s![..k, ..]).to_owned(),
            eigenvalues: self.eigenvalues.slice(ndarray::s![..k]).to_owned(),
            total_variance: self.total_variance,
        })
    }

    /// Binary format: `PCA1` tag, dimension, component count, total
    /// variance, mean, eigenvalues, then components row-major, little-endian.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        persist::write_tag(&mut w, b"PCA1").map_err(io)?;
        persist::write_u64(&mut w, self.dim() as u64).map_err(io)?;
        persist::write_u64(&mut w, self.k() as u64).map_err(io)?;
        persist::write_f64(&mut w, self.total_variance).map_err(io)?;
        persist::write_f64_slice(&mut w, self.mean.as_slice().expect("contiguous")).map_err(io)?;
        persist::write_f64_slice(&mut w, self.eigenvalues.as_slice().expect("contiguous"))
            .map_err(io)?;
        persist::write_array2(&mut w, &self.components).map_err(io)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut r = bytes.as_slice();
        persist::read_tag(&mut r, b"PCA1")?;
        let d = persist::read_u64(&mut r)? as usize;
        let k = persist::read_u64(&mut r)? as usize;
        if k == 0 || k > d {
            return Err(Error::Format(format!("persisted model has k={k}, d={d}")));
        }
        let total_variance = persist::read_f64(&mut r)?;
        let mean = persist::read_array1(&mut r, d)?;
        let eigenvalues = persist::read_array1(&mut r, k)?;
        let components = persist::read_array2(&mut r, k, d)?;
        persist::expect_eof(&mut r)?;
        Ok(PcaModel { mean, components, eigenvalues, total_variance })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn lcg_matrix(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
        Array2::from_shape_fn((n, d), |_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    /// Two-pass sample covariance (divisor N-1), independent of the fit path.
    fn covariance_two_pass(x: &ArrayView2<f64>) -> Array2<f64> {
        let n = x.nrows() as f64;
        let mean = x.mean_axis(Axis(0)).unwrap();
        let centered = x - &mean;
        centered.t().dot(&centered) / (n - 1.0)
    }

    /// Cyclic Jacobi eigensolver for symmetric matrices; returns
    /// (eigenvalues descending, eigenvectors as rows). Slow but independent
    /// of LAPACK, used as an oracle.
    fn jacobi_eigh(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
        let d = a.nrows();
        let mut m = a.clone();
        let mut v: Array2<f64> = Array2::eye(d);
        for _sweep in 0..200 {
            let mut off = 0.0;
            for p in 0..d {
                for q in (p + 1)..d {
                    off += m[(p, q)] * m[(p, q)];
                }
            }
            if off.sqrt() < 1e-14 {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = m[(p, q)];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for i in 0..d {
                        let mip = m[(i, p)];
                        let miq = m[(i, q)];
                        m[(i, p)] = c * mip - s * miq;
                        m[(i, q)] = s * mip + c * miq;
                    }
                    for i in 0..d {
                        let mpi = m[(p, i)];
                        let mqi = m[(q, i)];
                        m[(p, i)] = c * mpi - s * mqi;
                        m[(q, i)] = s * mpi + c * mqi;
                    }
                    for i in 0..d {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = c * vip - s * viq;
                        v[(i, q)] = s * vip + c * viq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
        let vals = order.iter().map(|&i| m[(i, i)]).collect();
        let mut rows = Array2::zeros((d, d));
        for (r, &i) in order.iter().enumerate() {
            rows.row_mut(r).assign(&v.column(i));
        }
        (vals, rows)
    }

    #[test]
    fn dominant_direction_is_recovered() {
        // Points spread along (1, 1) with slight orthogonal jitter.
        let mut x = Array2::zeros((40, 2));
        for i in 0..40 {
            let t = (i as f64 - 19.5) / 5.0;
            let jitter = 0.01 * ((i * 37 % 11) as f64 / 11.0 - 0.5);
            x[(i, 0)] = t + jitter;
            x[(i, 1)] = t - jitter;
        }
        let model = pca_fit(&x.view(), 2).unwrap();
        let inv_sqrt2 = 0.5f64.sqrt();
        assert_abs_diff_eq!(model.components[(0, 0)], inv_sqrt2, epsilon = 1e-2);
        assert_abs_diff_eq!(model.components[(0, 1)], inv_sqrt2, epsilon = 1e-2);
        assert!(model.eigenvalues[0] > 100.0 * model.eigenvalues[1]);
    }

    #[test]
    fn axis_aligned_fixture_has_exact_eigenvalues() {
        let a = 6f64.sqrt();
        let b = 1.5f64.sqrt();
        // Sample covariance (divisor 3) is diag(4, 1).
        let x = array![[a, 0.0], [-a, 0.0], [0.0, b], [0.0, -b]];
        let model = pca_fit(&x.view(), 2).unwrap();
        assert_abs_diff_eq!(model.eigenvalues[0], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(model.eigenvalues[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(model.components[(0, 0)].abs(), 1.0, epsilon = 1e-12);
        assert!(model.components[(0, 0)] > 0.0, "sign convention");
        assert_abs_diff_eq!(model.components[(1, 1)].abs(), 1.0, epsilon = 1e-12);
        assert!(model.components[(1, 1)] > 0.0, "sign convention");
        assert_abs_diff_eq!(model.total_variance, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalue_sum_equals_total_variance_at_full_rank() {
        let x = lcg_matrix(12, 6, 1);
        let model = pca_fit(&x.view(), 6).unwrap();
        assert_abs_diff_eq!(model.eigenvalues.sum(), model.total_variance, epsilon = 1e-12);
    }

    #[test]
    fn components_are_orthonormal_on_both_routes() {
        for (n, d) in [(12usize, 6usize), (6, 12)] {
            let x = lcg_matrix(n, d, 2);
            let k = n.min(d);
            let model = pca_fit(&x.view(), k).unwrap();
            let gram = model.components.dot(&model.components.t());
            for i in 0..k {
                for j in 0..k {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(gram[(i, j)], expect, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn covariance_route_matches_jacobi_oracle() {
        let x = lcg_matrix(20, 10, 3);
        let model = pca_fit(&x.view(), 10).unwrap();
        let (vals, vecs) = jacobi_eigh(&covariance_two_pass(&x.view()));
        for (i, &expected) in vals.iter().enumerate() {
            assert_abs_diff_eq!(model.eigenvalues[i], expected, epsilon = 1e-10);
            let align = model.components.row(i).dot(&vecs.row(i)).abs();
            assert_abs_diff_eq!(align, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn gram_route_matches_jacobi_oracle() {
        let x = lcg_matrix(8, 12, 4);
        let model = pca_fit(&x.view(), 7).unwrap();
        let (vals, vecs) = jacobi_eigh(&covariance_two_pass(&x.view()));
        for (i, &expected) in vals.iter().take(7).enumerate() {
            assert_abs_diff_eq!(model.eigenvalues[i], expected.max(0.0), epsilon = 1e-10);
            let align = model.components.row(i).dot(&vecs.row(i)).abs();
            assert_abs_diff_eq!(align, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn transform_centers_and_matches_eigenvalue_variances() {
        let x = lcg_matrix(30, 5, 5) + 3.0;
        let model = pca_fit(&x.view(), 5).unwrap();
        let mean = model.mean.clone().insert_axis(Axis(0));
        let z0 = model.transform(&mean.view()).unwrap();
        for &v in z0.iter() {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        }
        let z = model.transform(&x.view()).unwrap();
        let nf = x.nrows() as f64;
        for j in 0..5 {
            let col = z.column(j);
            let m = col.sum() / nf;
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (nf - 1.0);
            assert_abs_diff_eq!(var, model.eigenvalues[j], epsilon = 1e-10);
        }
    }

    #[test]
    fn full_rank_reconstruction_is_lossless() {
        let x = lcg_matrix(15, 6, 6);
        let model = pca_fit(&x.view(), 6).unwrap();
        let z = model.transform(&x.view()).unwrap();
        let back = model.inverse_transform(&z.view()).unwrap();
        for (a, b) in back.iter().zip(x.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn truncated_reconstruction_error_equals_discarded_variance() {
        let x = lcg_matrix(25, 8, 7);
        let full = pca_fit(&x.view(), 8).unwrap();
        let k = 3;
        let part = full.truncated(k).unwrap();
        let z = part.transform(&x.view()).unwrap();
        let back = part.inverse_transform(&z.view()).unwrap();
        let err: f64 = (&back - &x).iter().map(|v| v * v).sum();
        let discarded: f64 = full.eigenvalues.slice(ndarray::s![k..]).sum();
        let expect = (x.nrows() as f64 - 1.0) * discarded;
        assert_abs_diff_eq!(err, expect, epsilon = 1e-6 * expect.max(1.0));
    }

    #[test]
    fn inverse_of_zero_scores_is_the_mean() {
        let x = lcg_matrix(10, 4, 8) - 2.0;
        let model = pca_fit(&x.view(), 3).unwrap();
        let z = Array2::zeros((2, 3));
        let back = model.inverse_transform(&z.view()).unwrap();
        for row in back.rows() {
            for (a, b) in row.iter().zip(model.mean.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn retained_variance_never_exceeds_total() {
        let x = lcg_matrix(20, 10, 9);
        let model = pca_fit(&x.view(), 4).unwrap();
        assert!(model.eigenvalues.sum() <= model.total_variance + 1e-9);
    }

    #[test]
    fn explained_variance_fractions_are_exact_on_diagonal_data() {
        // Eigenvalues 4 and 1 with total variance 5.
        let a = 6f64.sqrt();
        let b = 1.5f64.sqrt();
        let x = array![[a, 0.0], [-a, 0.0], [0.0, b], [0.0, -b]];
        let model = pca_fit(&x.view(), 2).unwrap();
        let f = |r: Range<usize>, d| model.explained_variance_fraction(r, d).unwrap();
        assert_abs_diff_eq!(f(0..1, VarianceDenominator::Retained), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(f(0..1, VarianceDenominator::Total), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(f(0..2, VarianceDenominator::Retained), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f(1..2, VarianceDenominator::Total), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(f(1..1, VarianceDenominator::Total), 0.0, epsilon = 1e-15);
        // Keeping only the dominant component makes the two denominators differ.
        let part = model.truncated(1).unwrap();
        assert_abs_diff_eq!(
            part.explained_variance_fraction(0..1, VarianceDenominator::Retained).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            part.explained_variance_fraction(0..1, VarianceDenominator::Total).unwrap(),
            0.8,
            epsilon = 1e-12
        );
        assert!(model.explained_variance_fraction(0..3, VarianceDenominator::Total).is_err());
    }

    #[test]
    fn rank_deficient_gram_route_completes_the_basis() {
        // 6 rows confined to a 3-dimensional subspace of a 10-dim space.
        let basis = lcg_matrix(3, 10, 10);
        let coeffs = lcg_matrix(6, 3, 11);
        let x = coeffs.dot(&basis);
        let model = pca_fit(&x.view(), 5).unwrap();
        assert!(model.eigenvalues[3] <= 1e-10);
        assert!(model.eigenvalues[4] <= 1e-10);
        let gram = model.components.dot(&model.components.t());
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[(i, j)], expect, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn sign_convention_makes_fit_deterministic_under_negation() {
        let x = lcg_matrix(14, 5, 12);
        let a = pca_fit(&x.view(), 4).unwrap();
        let b = pca_fit(&(-&x).view(), 4).unwrap();
        for (u, v) in a.components.iter().zip(b.components.iter()) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-9);
        }
    }

    #[test]
    fn fit_rejects_bad_arguments() {
        let x = lcg_matrix(5, 3, 13);
        assert!(matches!(pca_fit(&x.view(), 0), Err(Error::Config(_))));
        assert!(matches!(pca_fit(&x.view(), 4), Err(Error::Config(_))));
        let one = lcg_matrix(1, 3, 13);
        assert!(matches!(pca_fit(&one.view(), 1), Err(Error::Config(_))));
        let mut y = x.clone();
        y[(0, 0)] = f64::NAN;
        assert!(matches!(pca_fit(&y.view(), 2), Err(Error::Numeric(_))));
        let model = pca_fit(&x.view(), 2).unwrap();
        assert!(model.transform(&lcg_matrix(2, 4, 0).view()).is_err());
        assert!(model.inverse_transform(&lcg_matrix(2, 3, 0).view()).is_err());
        assert!(model.truncated(0).is_err());
        assert!(model.truncated(3).is_err());
    }

    #[test]
    fn truncated_model_equals_prefix_of_full_transform() {
        let x = lcg_matrix(18, 7, 14);
        let full = pca_fit(&x.view(), 6).unwrap();
        let part = full.truncated(2).unwrap();
        let zf = full.transform(&x.view()).unwrap();
        let zp = part.transform(&x.view()).unwrap();
        for i in 0..x.nrows() {
            for j in 0..2 {
                assert_abs_diff_eq!(zp[(i, j)], zf[(i, j)], epsilon = 1e-12);
            }
        }
        assert_eq!(part.total_variance, full.total_variance);
    }

    #[test]
    fn model_round_trips_through_file_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let x = lcg_matrix(9, 4, 15);
        let model = pca_fit(&x.view(), 3).unwrap();
        let path = dir.path().join("model.pca");
        model.save(&path).unwrap();
        let back = PcaModel::load(&path).unwrap();
        assert_eq!(back.total_variance.to_bits(), model.total_variance.to_bits());
        for (a, b) in back.mean.iter().zip(model.mean.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in back.eigenvalues.iter().zip(model.eigenvalues.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in back.components.iter().zip(model.components.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
