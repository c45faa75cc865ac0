//! Per-image contrast normalization, ZCA whitening, and augmentation.
//!
//! Global contrast normalization (GCN) rescales each row to zero mean and
//! (approximately) unit contrast. ZCA whitening decorrelates feature columns
//! with the symmetric inverse square root of the feature covariance, which
//! keeps the result in pixel space rather than rotating into component
//! space. Augmentation produces randomly shifted / flipped / rescaled copies
//! of 3x32x32 images with a pinned RNG consumption order so a seed fully
//! determines the output.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2, Axis, Zip};
use ndarray_linalg::{Eigh, UPLO};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::persist;

/// Parameters of global contrast normalization:
/// `out = scale * (x - mean(x)) / max(epsilon, sqrt(lambda + mean((x - mean(x))^2)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcnParams {
    /// Target scale of the normalized row.
    pub scale: f64,
    /// Regularizer added to the mean squared deviation before the root.
    pub lambda: f64,
    /// Floor for the denominator, guarding near-constant rows.
    pub epsilon: f64,
}

impl Default for GcnParams {
    fn default() -> Self {
        GcnParams { scale: 1.0, lambda: 0.0, epsilon: 1e-8 }
    }
}

impl GcnParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::Config(format!("gcn scale {} must be positive", self.scale)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config(format!("gcn lambda {} must be non-negative", self.lambda)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Config(format!("gcn epsilon {} must be positive", self.epsilon)));
        }
        Ok(())
    }
}

/// Normalize a single row. See [`GcnParams`] for the formula.
pub fn gcn_row(x: ArrayView1<f64>, params: &GcnParams) -> Array1<f64> {
    let n = x.len() as f64;
    let mean = x.sum() / n;
    let mut dev = x.to_owned();
    dev -= mean;
    let contrast = (params.lambda + dev.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let denom = contrast.max(params.epsilon);
    dev *= params.scale / denom;
    dev
}

/// Normalize every row of a matrix independently (rows are images).
pub fn gcn(x: &ArrayView2<f64>, params: &GcnParams) -> Result<Array2<f64>> {
    params.validate()?;
    if x.is_empty() {
        return Err(Error::Shape("gcn of an empty matrix".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("gcn input holds non-finite values".into()));
    }
    let mut out = Array2::zeros(x.raw_dim());
    Zip::from(out.rows_mut()).and(x.rows()).par_for_each(|mut o, r| {
        o.assign(&gcn_row(r, params));
    });
    Ok(out)
}

/// A fitted ZCA whitening transform: `apply(x) = (x - mean) W` with
/// `W = V diag(1 / sqrt(eigenvalue + epsilon)) V^T` from the
/// eigendecomposition of the feature covariance (divisor `N`).
#[derive(Debug, Clone, PartialEq)]
pub struct ZcaModel {
    pub mean: Array1<f64>,
    pub whitening: Array2<f64>,
    pub epsilon: f64,
}

/// Fit a whitening transform on the rows of `x`.
///
/// `epsilon = 0` is accepted but requires a full-rank covariance; any
/// non-positive eigenvalue then makes the inverse root undefined and is
/// reported as a numeric failure.
pub fn zca_fit(x: &ArrayView2<f64>, epsilon: f64) -> Result<ZcaModel> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::Config(format!("zca epsilon {epsilon} must be non-negative")));
    }
    let n = x.nrows();
    if n < 2 {
        return Err(Error::Config(format!("zca needs at least 2 rows, got {n}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("zca input holds non-finite values".into()));
    }
    let nf = n as f64;
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    // Covariance via raw moments: E[x x^T] - mean mean^T, divisor N. This
    // avoids materializing a centered copy of the data.
    let mut cov = x.t().dot(x);
    cov /= nf;
    let outer = mean
        .view()
        .insert_axis(Axis(1))
        .dot(&mean.view().insert_axis(Axis(0)));
    cov -= &outer;
    // Symmetrize to undo floating-point asymmetry before eigh.
    let cov = (&cov + &cov.t()) * 0.5;
    let (eigenvalues, eigenvectors) = cov
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Numeric(format!("zca eigendecomposition failed: {e}")))?;
    let inv_root: Array1<f64> =
        eigenvalues.mapv(|l| 1.0 / (l.max(0.0) + epsilon).sqrt());
    if inv_root.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(
            "zca covariance is singular; use a positive epsilon".into(),
        ));
    }
    let mut scaled = eigenvectors.clone();
    for (mut col, &s) in scaled.columns_mut().into_iter().zip(inv_root.iter()) {
        col *= s;
    }
    let whitening = scaled.dot(&eigenvectors.t());
    Ok(ZcaModel { mean, whitening, epsilon })
}

impl ZcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Whiten rows: `(x - mean) W`, evaluated as `x W - mean W` so the mean
    /// row itself maps to exact zeros.
    pub fn apply(&self, x: &ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "zca fitted on {} columns, input has {}",
                self.dim(),
                x.ncols()
            )));
        }
        let mut out = x.dot(&self.whitening);
        let offset = self.mean.dot(&self.whitening);
        out -= &offset;
        Ok(out)
    }

    /// Binary format: `ZCA1` tag, dimension, epsilon, mean, then the
    /// whitening matrix row-major, all little-endian.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        persist::write_tag(&mut w, b"ZCA1").map_err(io)?;
        persist::write_u64(&mut w, self.dim() as u64).map_err(io)?;
        persist::write_f64(&mut w, self.epsilon).map_err(io)?;
        persist::write_f64_slice(&mut w, self.mean.as_slice().expect("contiguous")).map_err(io)?;
        persist::write_array2(&mut w, &self.whitening).map_err(io)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut r = bytes.as_slice();
        persist::read_tag(&mut r, b"ZCA1")?;
        let d = persist::read_u64(&mut r)? as usize;
        let epsilon = persist::read_f64(&mut r)?;
        let mean = persist::read_array1(&mut r, d)?;
        let whitening = persist::read_array2(&mut r, d, d)?;
        persist::expect_eof(&mut r)?;
        Ok(ZcaModel { mean, whitening, epsilon })
    }
}

/// One image as channels x height x width (3 x 32 x 32).
pub type Image = Array3<f64>;

pub const IMAGE_CHANNELS: usize = 3;
pub const IMAGE_SIDE: usize = 32;

/// Reshape a 3072-value dataset row into channel-planar image form.
pub fn image_from_row(row: ArrayView1<f64>) -> Result<Image> {
    if row.len() != IMAGE_CHANNELS * IMAGE_SIDE * IMAGE_SIDE {
        return Err(Error::Shape(format!("image row has {} values, expected 3072", row.len())));
    }
    Ok(row
        .to_owned()
        .into_shape_with_order((IMAGE_CHANNELS, IMAGE_SIDE, IMAGE_SIDE))
        .expect("3072 = 3*32*32"))
}

/// Flatten an image back into a 3072-value row (inverse of
/// [`image_from_row`]).
pub fn row_from_image(img: &Image) -> Array1<f64> {
    Array1::from_iter(img.iter().copied())
}

/// Random shift / horizontal flip / intensity rescale parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentConfig {
    /// Reflect-pad width; shifts are drawn from `0..=2*pad`.
    pub pad: usize,
    /// Probability of mirroring the image left-right.
    pub flip_probability: f64,
    /// Intensity multiplier drawn uniformly from this closed range.
    pub scale_range: (f64, f64),
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig { pad: 4, flip_probability: 0.5, scale_range: (0.9, 1.1) }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pad >= IMAGE_SIDE {
            return Err(Error::Config(format!("augment pad {} must be below {IMAGE_SIDE}", self.pad)));
        }
        if !(0.0..=1.0).contains(&self.flip_probability) {
            return Err(Error::Config(format!(
                "flip probability {} not in [0, 1]",
                self.flip_probability
            )));
        }
        let (lo, hi) = self.scale_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::Config(format!("bad scale range ({lo}, {hi})")));
        }
        Ok(())
    }
}

/// Mirror an out-of-bounds coordinate back into `0..size` without repeating
/// the border pixel (`-1 -> 1`, `size -> size - 2`).
fn reflect(i: isize, size: isize) -> usize {
    let r = if i < 0 {
        -i
    } else if i >= size {
        2 * (size - 1) - i
    } else {
        i
    };
    debug_assert!((0..size).contains(&r));
    r as usize
}

/// Produce one augmented copy of `img`.
///
/// Exactly four RNG draws are consumed, in this order, regardless of the
/// configuration: shift-x (`next_u64 mod (2*pad+1)`), shift-y (same), flip
/// (`f64 < flip_probability`), scale (`lo + (hi-lo)*f64`). The shifted crop
/// is taken from the reflect-padded image, then flipped, then rescaled.
pub fn augment<R: RngCore + ?Sized>(
    img: &Image,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<Image> {
    cfg.validate()?;
    if img.dim() != (IMAGE_CHANNELS, IMAGE_SIDE, IMAGE_SIDE) {
        return Err(Error::Shape(format!("augment expects a 3x32x32 image, got {:?}", img.dim())));
    }
    let side = IMAGE_SIDE as isize;
    let pad = cfg.pad as isize;
    let span = 2 * cfg.pad as u64 + 1;
    let dx = (rng.next_u64() % span) as isize;
    let dy = (rng.next_u64() % span) as isize;
    let flip = rng.gen::<f64>() < cfg.flip_probability;
    let (lo, hi) = cfg.scale_range;
    let scale = lo + (hi - lo) * rng.gen::<f64>();
    let mut out = Image::zeros((IMAGE_CHANNELS, IMAGE_SIDE, IMAGE_SIDE));
    for c in 0..IMAGE_CHANNELS {
        for y in 0..side {
            let sy = reflect(y + dy - pad, side);
            for x in 0..side {
                let fx = if flip { side - 1 - x } else { x };
                let sx = reflect(fx + dx - pad, side);
                out[(c, y as usize, x as usize)] = img[(c, sy, sx)] * scale;
            }
        }
    }
    Ok(out)
}

/// Augment every row of an image matrix, row by row, using a fresh
/// generator seeded with `seed`. Row `i` of the output is the augmentation
/// of row `i` of the input.
pub fn augment_rows(x: &ArrayView2<f64>, cfg: &AugmentConfig, seed: u64) -> Result<Array2<f64>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Array2::zeros(x.raw_dim());
    for (row, mut dst) in x.rows().into_iter().zip(out.rows_mut()) {
        let img = image_from_row(row)?;
        let aug = augment(&img, cfg, &mut rng)?;
        dst.assign(&row_from_image(&aug));
    }
    Ok(out)
}
