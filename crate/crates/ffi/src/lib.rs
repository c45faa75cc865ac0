//! C ABI for the classifier-fusion toolkit.
//!
//! Conventions, mirrored in the generated `include/cifar_ensemble.h`:
//!
//! * Every fallible call returns a [`CeStatus`]; results leave through out
//!   pointers. `CE_STATUS_OK` is zero.
//! * Handles (`CeDataset`, `CeMatrix`, …) are opaque. Each is created by
//!   exactly one family of functions and released with its `ce_*_free`,
//!   which tolerates null. Handles are not reference-counted: freeing one
//!   twice or using a freed handle is undefined behavior, as in any C API.
//! * After a non-OK status, [`ce_last_error_message`] returns a description
//!   of the failure. The pointer stays valid until the next failing call on
//!   the same thread.
//! * Matrices cross the boundary as dense row-major `double` buffers.
//! * All pointer arguments must be non-null and, for array arguments, point
//!   to at least the documented number of elements.

// The pointer contract (non-null, documented element counts, handles freed
// exactly once) is stated once in the crate docs and the generated header
// rather than repeated per function.
#![allow(clippy::missing_safety_doc)]

use std::any::Any;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use ndarray::Array2;

use cifar_ensemble::dataset::{self, Dataset};
use cifar_ensemble::ensemble::{self, EnsembleWeights, WeightGrid};
use cifar_ensemble::error::Error;
use cifar_ensemble::evaluation::accuracy;
use cifar_ensemble::experts::{export_expert, load_expert, ProbMatrix};
use cifar_ensemble::linear::{logreg_train, LogRegHyper, LogRegModel};
use cifar_ensemble::neighbors::{knn_fit, KnnModel, VoteRule};
use cifar_ensemble::pca::{pca_fit, PcaModel, VarianceDenominator};
use cifar_ensemble::preprocess::{gcn, zca_fit, GcnParams, ZcaModel};

// ===== status and error reporting ==========================================

/// Result of every API call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CeStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Invalid parameters or configuration (matches process exit code 2).
    InvalidConfig = 2,
    /// Unreadable, malformed, or mis-shaped data (matches exit code 3).
    DataError = 3,
    /// A numeric failure such as divergence (matches exit code 4).
    NumericError = 4,
    /// The library panicked internally; state may be inconsistent.
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = clean);
}

fn panic_text(payload: Box<dyn Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".to_string()
    }
}

/// Run a fallible body, converting library errors and panics to statuses.
fn guard<F: FnOnce() -> Result<CeStatus, Error>>(body: F) -> CeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err(err)) => {
            set_error(&err.to_string());
            match err.exit_code() {
                2 => CeStatus::InvalidConfig,
                4 => CeStatus::NumericError,
                _ => CeStatus::DataError,
            }
        }
        Err(payload) => {
            set_error(&format!("internal panic: {}", panic_text(payload)));
            CeStatus::Panic
        }
    }
}

macro_rules! require {
    ($ptr:expr) => {
        if $ptr.is_null() {
            set_error(concat!("null pointer argument: ", stringify!($ptr)));
            return Ok(CeStatus::NullArgument);
        }
    };
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) {
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

unsafe fn free_handle<T>(ptr: *mut T) {
    if !ptr.is_null() {
        drop(unsafe { Box::from_raw(ptr) });
    }
}

unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, Error> {
    let s = unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| Error::Config("path argument is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

/// Describes the most recent failure on this thread. Empty until a call
/// fails; valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ce_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ce_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ===== opaque handles =======================================================

/// Opaque labeled image dataset (features, labels, class names).
pub struct CeDataset(Dataset);

/// Opaque dense row-major matrix of doubles.
pub struct CeMatrix(Array2<f64>);

/// Opaque ZCA whitening transform.
pub struct CeZca(ZcaModel);

/// Opaque PCA basis.
pub struct CePca(PcaModel);

/// Opaque exact K-nearest-neighbors model.
pub struct CeKnn(KnnModel);

/// Opaque multinomial logistic-regression model.
pub struct CeLogReg(LogRegModel);

/// Opaque named per-class score matrix ("expert"), one row per example.
pub struct CeExpert(ProbMatrix);

/// Opaque fusion weight vector with its search metadata.
pub struct CeWeights(EnsembleWeights);

// ===== dataset ==============================================================

/// Load the five training batches plus the test batch from a directory in
/// the standard binary layout. On success `*out_train` and `*out_test`
/// receive new handles.
#[no_mangle]
pub unsafe extern "C" fn ce_dataset_load_dir(
    dir: *const c_char,
    out_train: *mut *mut CeDataset,
    out_test: *mut *mut CeDataset,
) -> CeStatus {
    guard(|| {
        require!(dir);
        require!(out_train);
        require!(out_test);
        let dir = unsafe { path_arg(dir) }?;
        let (train, test) = dataset::load_cifar_dir(&dir)?;
        unsafe {
            write_out(out_train, CeDataset(train));
            write_out(out_test, CeDataset(test));
        }
        Ok(CeStatus::Ok)
    })
}

/// Load a single binary batch file.
#[no_mangle]
pub unsafe extern "C" fn ce_dataset_load_batch(
    path: *const c_char,
    out: *mut *mut CeDataset,
) -> CeStatus {
    guard(|| {
        require!(path);
        require!(out);
        let path = unsafe { path_arg(path) }?;
        let ds = dataset::load_cifar_batch(&path)?;
        unsafe { write_out(out, CeDataset(ds)) };
        Ok(CeStatus::Ok)
    })
}

/// Number of examples in the dataset.
#[no_mangle]
pub unsafe extern "C" fn ce_dataset_len(ds: *const CeDataset, out: *mut usize) -> CeStatus {
    guard(|| {
        require!(ds);
        require!(out);
        unsafe { *out = (*ds).0.len() };
        Ok(CeStatus::Ok)
    })
}

/// Number of feature columns per example.
#[no_mangle]
pub unsafe extern "C" fn ce_dataset_dim(ds: *const CeDataset, out: *mut usize) -> CeStatus {
    guard(|| {
        require!(ds);
        require!(out);
        unsafe { *out = (*ds).0.dim() };
        Ok(CeStatus::Ok)
    })
}

/// Copy the feature matrix into a new matrix handle.
#[no_mangle]
pub unsafe extern "C" fn ce_dataset_features(
    ds: *const CeDataset,
    out: *mut *mut CeMatrix,
) -> CeStatus {
    guard(|| {
        require!(ds);
        require!(out);
        let features = unsafe { (*ds).0.features.clone() };
        unsafe { write_out(out, CeMatrix(features)) };
        Ok(CeStatus::Ok)
    })
}

/// Copy the labels into `buf`, which must hold at least `cap` bytes and
/// `cap` must be at least the dataset length.
#[no_mangle]
pub unsafe extern "C" fn ce_dataset_labels(
    ds: *const CeDataset,
    buf: *mut u8,
    cap: usize,
) -> CeStatus {
    guard(|| {
        require!(ds);
        require!(buf);
        let labels = unsafe { &(*ds).0.labels };
        if cap < labels.len() {
            return Err(Error::Config(format!(
                "label buffer holds {cap} entries, need {}",
                labels.len()
            )));
        }
        unsafe { std::ptr::copy_nonoverlapping(labels.as_ptr(), buf, labels.len()) };
        Ok(CeStatus::Ok)
    })
}

/// Release a dataset handle (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn ce_dataset_free(ds: *mut CeDataset) {
    unsafe { free_handle(ds) };
}

// ===== matrices =============================================================

/// Create a matrix from a row-major buffer of `rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn ce_matrix_create(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut CeMatrix,
) -> CeStatus {
    guard(|| {
        require!(data);
        require!(out);
        let n = rows.checked_mul(cols).ok_or_else(|| {
            Error::Config(format!("matrix shape {rows}x{cols} overflows"))
        })?;
        let values = unsafe { std::slice::from_raw_parts(data, n) }.to_vec();
        let m = Array2::from_shape_vec((rows, cols), values)
            .map_err(|e| Error::Shape(e.to_string()))?;
        unsafe { write_out(out, CeMatrix(m)) };
        Ok(CeStatus::Ok)
    })
}

/// Report the shape of a matrix.
#[no_mangle]
pub unsafe extern "C" fn ce_matrix_shape(
    m: *const CeMatrix,
    rows: *mut usize,
    cols: *mut usize,
) -> CeStatus {
    guard(|| {
        require!(m);
        require!(rows);
        require!(cols);
        unsafe {
            *rows = (*m).0.nrows();
            *cols = (*m).0.ncols();
        }
        Ok(CeStatus::Ok)
    })
}

/// Copy the matrix into `buf` in row-major order; `cap` must be at least
/// `rows * cols`.
#[no_mangle]
pub unsafe extern "C" fn ce_matrix_copy_data(
    m: *const CeMatrix,
    buf: *mut f64,
    cap: usize,
) -> CeStatus {
    guard(|| {
        require!(m);
        require!(buf);
        let matrix = unsafe { &(*m).0 };
        let n = matrix.len();
        if cap < n {
            return Err(Error::Config(format!("buffer holds {cap} entries, need {n}")));
        }
        let out = unsafe { std::slice::from_raw_parts_mut(buf, n) };
        for (dst, src) in out.iter_mut().zip(matrix.iter()) {
            *dst = *src;
        }
        Ok(CeStatus::Ok)
    })
}

/// Release a matrix handle (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn ce_matrix_free(m: *mut CeMatrix) {
    unsafe { free_handle(m) };
}

// ===== preprocessing ========================================================

/// Contrast-normalize each row: subtract its mean, then divide by
/// `max(epsilon, sqrt(lambda + variance))`, times `scale`.
#[no_mangle]
pub unsafe extern "C" fn ce_gcn(
    m: *const CeMatrix,
    scale: f64,
    lambda: f64,
    epsilon: f64,
    out: *mut *mut CeMatrix,
) -> CeStatus {
    guard(|| {
        require!(m);
        require!(out);
        let params = GcnParams { scale, lambda, epsilon };
        let result = gcn(&unsafe { &(*m).0 }.view(), &params)?;
        unsafe { write_out(out, CeMatrix(result)) };
        Ok(CeStatus::Ok)
    })
}

/// Fit a ZCA whitening transform on the rows of `m`.
#[no_mangle]
pub unsafe extern "C" fn ce_zca_fit(
    m: *const CeMatrix,
    epsilon: f64,
    out: *mut *mut CeZca,
) -> CeStatus {
    guard(|| {
        require!(m);
        require!(out);
        let model = zca_fit(&unsafe { &(*m).0 }.view(), epsilon)?;
        unsafe { write_out(out, CeZca(model)) };
        Ok(CeStatus::Ok)
    })
}

/// Whiten the rows of `m` with a fitted transform.
#[no_mangle]
pub unsafe extern "C" fn ce_zca_apply(
    zca: *const CeZca,
    m: *const CeMatrix,
    out: *mut *mut CeMatrix,
) -> CeStatus {
    guard(|| {
        require!(zca);
        require!(m);
        require!(out);
        let result = unsafe { &(*zca).0 }.apply(&unsafe { &(*m).0 }.view())?;
        unsafe { write_out(out, CeMatrix(result)) };
        Ok(CeStatus::Ok)
    })
}

/// Release a ZCA handle (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn ce_zca_free(zca: *mut CeZca) {
    unsafe { free_handle(zca) };
}

// ===== PCA ==================================================================

/// Which variance total a fraction is measured against.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CeVarianceDenominator {
    /// Sum of the eigenvalues kept in the model.
    Retained = 0,
    /// Trace of the full covariance, including discarded directions.
    Total = 1,
}

impl From<CeVarianceDenominator> for VarianceDenominator {
    fn from(v: CeVarianceDenominator) -> Self {
        match v {
            CeVarianceDenominator::Retained => VarianceDenominator::Retained,
            CeVarianceDenominator::Total => VarianceDenominator::Total,
        }
    }
}

/// Fit a PCA basis with `components` directions on the rows of `m`.
#[no_mangle]
pub unsafe extern "C" fn ce_pca_fit(
    m: *const CeMatrix,
    components: usize,
    out: *mut *mut CePca,
) -> CeStatus {
    guard(|| {
        require!(m);
        require!(out);
        let model = pca_fit(&unsafe { &(*m).0 }.view(), components)?;
        unsafe { write_out(out, CePca(model)) };
        Ok(CeStatus::Ok)
    })
}

/// Project each row of `m` onto the basis.
#[no_mangle]
pub unsafe extern "C" fn ce_pca_transform(
    pca: *const CePca,
    m: *const CeMatrix,
    out: *mut *mut CeMatrix,
) -> CeStatus {
    guard(|| {
        require!(pca);
        require!(m);
        require!(out);
        let result = unsafe { &(*pca).0 }.transform(&unsafe { &(*m).0 }.view())?;
        unsafe { write_out(out, CeMatrix(result)) };
        Ok(CeStatus::Ok)
    })
}

/// Map projected rows back to the original feature space.
#[no_mangle]
pub unsafe extern "C" fn ce_pca_inverse_transform(
    pca: *const CePca,
    m: *const CeMatrix,
    out: *mut *mut CeMatrix,
) -> CeStatus {
    guard(|| {
        require!(pca);
        require!(m);
        require!(out);
        let result = unsafe { &(*pca).0 }.inverse_transform(&unsafe { &(*m).0 }.view())?;
        unsafe { write_out(out, CeMatrix(result)) };
        Ok(CeStatus::Ok)
    })
}

/// Fraction of variance carried by components `start..end` (half-open).
#[no_mangle]
pub unsafe extern "C" fn ce_pca_explained_variance_fraction(
    pca: *const CePca,
    start: usize,
    end: usize,
    denominator: CeVarianceDenominator,
    out: *mut f64,
) -> CeStatus {
    guard(|| {
        require!(pca);
        require!(out);
        let f = unsafe { &(*pca).0 }.explained_variance_fraction(start..end, denominator.into())?;
        unsafe { *out = f };
        Ok(CeStatus::Ok)
    })
}

/// Release a PCA handle (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn ce_pca_free(pca: *mut CePca) {
    unsafe { free_handle(pca) };
}

// ===== K-nearest neighbors ==================================================

/// How neighbors vote.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CeVoteRule {
    /// Each of the k neighbors contributes one vote.
    Uniform = 0,
    /// Each neighbor contributes 1 / (distance + epsilon).
    InverseDistance = 1,
}

impl From<CeVoteRule> for VoteRule {
    fn from(v: CeVoteRule) -> Self {
        match v {
            CeVoteRule::Uniform => VoteRule::Uniform,
            CeVoteRule::InverseDistance => VoteRule::InverseDistance,
        }
    }
}

/// Build an exact KNN model over `features` (copied) with one label per row.
#[no_mangle]
pub unsafe extern "C" fn ce_knn_fit(
    features: *const CeMatrix,
    labels: *const u8,
    labels_len: usize,
    k: usize,
    vote: CeVoteRule,
    out: *mut *mut CeKnn,
) -> CeStatus {
    guard(|| {
        require!(features);
        require!(labels);
        require!(out);
        let x = unsafe { &(*features).0 }.clone();
        let y = unsafe { std::slice::from_raw_parts(labels, labels_len) }.to_vec();
        let model = knn_fit(x, y, k, vote.into())?;
        unsafe { write_out(out, CeKnn(model)) };
        Ok(CeStatus::Ok)
    })
}

/// Vote-count scores for each query row, as an expert named "knn".
#[no_mangle]
pub unsafe extern "C" fn ce_knn_predict_scores(
    knn: *const CeKnn,
    queries: *const CeMatrix,
    out: *mut *mut CeExpert,
) -> CeStatus {
    guard(|| {
        require!(knn);
        require!(queries);
        require!(out);
        let scores = unsafe { &(*knn).0 }.predict_scores(&unsafe { &(*queries).0 }.view())?;
        unsafe { write_out(out, CeExpert(scores)) };
        Ok(CeStatus::Ok)
    })
}

/// Release a KNN handle (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn ce_knn_free(knn: *mut CeKnn) {
    unsafe { free_handle(knn) };
}

// ===== logistic regression ==================================================

/// Hyperparameters for ce_logreg_train().
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CeLogRegHyper {
    /// Gradient-descent step size (must be positive).
    pub learning_rate: f64,
    /// Number of passes over the training data (must be positive).
    pub epochs: usize,
    /// Mini-batch size (must be positive).
    pub batch_size: usize,
    /// Coefficient of the (l2/2)·‖W‖² penalty (must be non-negative).
    pub l2: f64,
    /// Whether to z-score features with training statistics first.
    pub standardize: bool,
    /// Seed for the shuffling RNG.
    pub seed: u64,
}

/// The documented default hyperparameters.
#[no_mangle]
pub extern "C" fn ce_logreg_hyper_default() -> CeLogRegHyper {
    let h = LogRegHyper::default();
    CeLogRegHyper {
        learning_rate: h.learning_rate,
        epochs: h.epochs,
        batch_size: h.batch_size,
        l2: h.l2,
        standardize: h.standardize,
        seed: h.seed,
    }
}

/// Train a multinomial logistic-regression model with mini-batch gradient
/// descent on `features` with one label per row.
#[no_mangle]
pub unsafe extern "C" fn ce_logreg_train(
    features: *const CeMatrix,
    labels: *const u8,
    labels_len: usize,
    hyper: CeLogRegHyper,
    out: *mut *mut CeLogReg,
) -> CeStatus {
    guard(|| {
        require!(features);
        require!(labels);
        require!(out);
        let y = unsafe { std::slice::from_raw_parts(labels, labels_len) };
        let h = LogRegHyper {
            learning_rate: hyper.learning_rate,
            epochs: hyper.epochs,
            batch_size: hyper.batch_size,
            l2: hyper.l2,
            standardize: hyper.standardize,
            seed: hyper.seed,
        };
        let model = logreg_train(&unsafe { &(*features).0 }.view(), y, &h)?;
        unsafe { write_out(out, CeLogReg(model)) };
        Ok(CeStatus::Ok)
    })
}

/// Class-probability scores for each query row, as an expert named "logreg".
#[no_mangle]
pub unsafe extern "C" fn ce_logreg_predict_scores(
    model: *const CeLogReg,
    queries: *const CeMatrix,
    out: *mut *mut CeExpert,
) -> CeStatus {
    guard(|| {
        require!(model);
        require!(queries);
        require!(out);
        let scores = unsafe { &(*model).0 }.predict_scores(&unsafe { &(*queries).0 }.view())?;
        unsafe { write_out(out, CeExpert(scores)) };
        Ok(CeStatus::Ok)
    })
}

/// Release a logistic-regression handle (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn ce_logreg_free(model: *mut CeLogReg) {
    unsafe { free_handle(model) };
}

// ===== experts ==============================================================

/// Parse an expert score file. Pass `expected_rows < 0` to accept any row
/// count, otherwise the file must hold exactly that many rows.
#[no_mangle]
pub unsafe extern "C" fn ce_expert_load(
    path: *const c_char,
    expected_rows: i64,
    out: *mut *mut CeExpert,
) -> CeStatus {
    guard(|| {
        require!(path);
        require!(out);
        let path = unsafe { path_arg(path) }?;
        let expected = usize::try_from(expected_rows).ok();
        let expert = load_expert(&path, expected)?;
        unsafe { write_out(out, CeExpert(expert)) };
        Ok(CeStatus::Ok)
    })
}

/// Write an expert score file in the interchange format.
#[no_mangle]
pub unsafe extern "C" fn ce_expert_export(
    expert: *const CeExpert,
    path: *const c_char,
) -> CeStatus {
    guard(|| {
        require!(expert);
        require!(path);
        let path = unsafe { path_arg(path) }?;
        export_expert(unsafe { &(*expert).0 }, &path)?;
        Ok(CeStatus::Ok)
    })
}

/// Wrap a 10-column score matrix as a named expert. With `row_stochastic`
/// set, rows must sum to 1 within tolerance and are renormalized.
#[no_mangle]
pub unsafe extern "C" fn ce_expert_from_scores(
    m: *const CeMatrix,
    name: *const c_char,
    row_stochastic: bool,
    out: *mut *mut CeExpert,
) -> CeStatus {
    guard(|| {
        require!(m);
        require!(name);
        require!(out);
        let name = unsafe { CStr::from_ptr(name) }
            .to_str()
            .map_err(|_| Error::Config("expert name is not valid UTF-8".into()))?;
        let expert = ProbMatrix::new(unsafe { &(*m).0 }.clone(), name, row_stochastic)?;
        unsafe { write_out(out, CeExpert(expert)) };
        Ok(CeStatus::Ok)
    })
}

/// Number of rows (examples) in the expert.
#[no_mangle]
pub unsafe extern "C" fn ce_expert_rows(expert: *const CeExpert, out: *mut usize) -> CeStatus {
    guard(|| {
        require!(expert);
        require!(out);
        unsafe { *out = (*expert).0.len() };
        Ok(CeStatus::Ok)
    })
}

/// Copy the expert's name into `buf` as a NUL-terminated string; `cap` must
/// cover the name plus the terminator.
#[no_mangle]
pub unsafe extern "C" fn ce_expert_name(
    expert: *const CeExpert,
    buf: *mut c_char,
    cap: usize,
) -> CeStatus {
    guard(|| {
        require!(expert);
        require!(buf);
        let name = unsafe { (*expert).0.name.as_bytes() };
        if cap < name.len() + 1 {
            return Err(Error::Config(format!(
                "name buffer holds {cap} bytes, need {}",
                name.len() + 1
            )));
        }
        unsafe {
            std::ptr::copy_nonoverlapping(name.as_ptr(), buf as *mut u8, name.len());
            *buf.add(name.len()) = 0;
        }
        Ok(CeStatus::Ok)
    })
}

/// Copy the expert's score matrix into a new matrix handle.
#[no_mangle]
pub unsafe extern "C" fn ce_expert_scores(
    expert: *const CeExpert,
    out: *mut *mut CeMatrix,
) -> CeStatus {
    guard(|| {
        require!(expert);
        require!(out);
        let scores = unsafe { (*expert).0.scores.clone() };
        unsafe { write_out(out, CeMatrix(scores)) };
        Ok(CeStatus::Ok)
    })
}

/// Write each row's predicted class (highest score, lowest index on ties)
/// into `buf`; `cap` must be at least the row count.
#[no_mangle]
pub unsafe extern "C" fn ce_expert_argmax(
    expert: *const CeExpert,
    buf: *mut u8,
    cap: usize,
) -> CeStatus {
    guard(|| {
        require!(expert);
        require!(buf);
        let predicted = ensemble::argmax_labels(unsafe { &(*expert).0 });
        if cap < predicted.len() {
            return Err(Error::Config(format!(
                "label buffer holds {cap} entries, need {}",
                predicted.len()
            )));
        }
        unsafe { std::ptr::copy_nonoverlapping(predicted.as_ptr(), buf, predicted.len()) };
        Ok(CeStatus::Ok)
    })
}

/// Fraction of rows whose predicted class equals `truth` (one label per row).
#[no_mangle]
pub unsafe extern "C" fn ce_expert_accuracy(
    expert: *const CeExpert,
    truth: *const u8,
    truth_len: usize,
    out: *mut f64,
) -> CeStatus {
    guard(|| {
        require!(expert);
        require!(truth);
        require!(out);
        let predicted = ensemble::argmax_labels(unsafe { &(*expert).0 });
        let truth = unsafe { std::slice::from_raw_parts(truth, truth_len) };
        let acc = accuracy(&predicted, truth)?;
        unsafe { *out = acc };
        Ok(CeStatus::Ok)
    })
}

/// Release an expert handle (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn ce_expert_free(expert: *mut CeExpert) {
    unsafe { free_handle(expert) };
}

// ===== weighted fusion ======================================================

/// Combine `count` experts (all with the same row count) into one expert
/// whose scores are the weighted sum; `weights` holds one non-negative
/// weight per expert, not all zero.
#[no_mangle]
pub unsafe extern "C" fn ce_fuse(
    experts: *const *const CeExpert,
    count: usize,
    weights: *const f64,
    out: *mut *mut CeExpert,
) -> CeStatus {
    guard(|| {
        require!(experts);
        require!(weights);
        require!(out);
        let handles = unsafe { std::slice::from_raw_parts(experts, count) };
        let mut refs: Vec<&ProbMatrix> = Vec::with_capacity(count);
        for (i, &h) in handles.iter().enumerate() {
            if h.is_null() {
                set_error(&format!("null expert handle at index {i}"));
                return Ok(CeStatus::NullArgument);
            }
            refs.push(unsafe { &(*h).0 });
        }
        let w = unsafe { std::slice::from_raw_parts(weights, count) };
        let fused = ensemble::fuse(&refs, w)?;
        unsafe { write_out(out, CeExpert(fused)) };
        Ok(CeStatus::Ok)
    })
}

/// Exhaustively search a step-by-step weight grid for the pair maximizing
/// accuracy of `wa*a + wb*b` against `truth`; ties pick the smallest pair.
#[no_mangle]
pub unsafe extern "C" fn ce_pairwise_search(
    a: *const CeExpert,
    b: *const CeExpert,
    truth: *const u8,
    truth_len: usize,
    grid_step: f64,
    grid_max: f64,
    out: *mut *mut CeWeights,
) -> CeStatus {
    guard(|| {
        require!(a);
        require!(b);
        require!(truth);
        require!(out);
        let grid = WeightGrid::new(grid_step, grid_max)?;
        let truth = unsafe { std::slice::from_raw_parts(truth, truth_len) };
        let result =
            ensemble::pairwise_search(unsafe { &(*a).0 }, unsafe { &(*b).0 }, truth, &grid)?;
        unsafe { write_out(out, CeWeights(result)) };
        Ok(CeStatus::Ok)
    })
}

/// Fold `count >= 2` experts left to right, running a pairwise search per
/// stage between the running fusion and the next expert; returns one flat
/// weight per expert.
#[no_mangle]
pub unsafe extern "C" fn ce_chained_search(
    experts: *const *const CeExpert,
    count: usize,
    truth: *const u8,
    truth_len: usize,
    grid_step: f64,
    grid_max: f64,
    out: *mut *mut CeWeights,
) -> CeStatus {
    guard(|| {
        require!(experts);
        require!(truth);
        require!(out);
        let handles = unsafe { std::slice::from_raw_parts(experts, count) };
        let mut refs: Vec<&ProbMatrix> = Vec::with_capacity(count);
        for (i, &h) in handles.iter().enumerate() {
            if h.is_null() {
                set_error(&format!("null expert handle at index {i}"));
                return Ok(CeStatus::NullArgument);
            }
            refs.push(unsafe { &(*h).0 });
        }
        let grid = WeightGrid::new(grid_step, grid_max)?;
        let truth = unsafe { std::slice::from_raw_parts(truth, truth_len) };
        let result = ensemble::chained_search(&refs, truth, &grid)?;
        unsafe { write_out(out, CeWeights(result)) };
        Ok(CeStatus::Ok)
    })
}

/// Number of weights (one per fused expert).
#[no_mangle]
pub unsafe extern "C" fn ce_weights_len(w: *const CeWeights, out: *mut usize) -> CeStatus {
    guard(|| {
        require!(w);
        require!(out);
        unsafe { *out = (*w).0.weights.len() };
        Ok(CeStatus::Ok)
    })
}

/// Copy the weight values into `buf`; `cap` must be at least the count.
#[no_mangle]
pub unsafe extern "C" fn ce_weights_values(
    w: *const CeWeights,
    buf: *mut f64,
    cap: usize,
) -> CeStatus {
    guard(|| {
        require!(w);
        require!(buf);
        let weights = unsafe { &(*w).0.weights };
        if cap < weights.len() {
            return Err(Error::Config(format!(
                "weight buffer holds {cap} entries, need {}",
                weights.len()
            )));
        }
        unsafe { std::ptr::copy_nonoverlapping(weights.as_ptr(), buf, weights.len()) };
        Ok(CeStatus::Ok)
    })
}

/// Accuracy the search achieved on the rows it searched.
#[no_mangle]
pub unsafe extern "C" fn ce_weights_achieved_accuracy(
    w: *const CeWeights,
    out: *mut f64,
) -> CeStatus {
    guard(|| {
        require!(w);
        require!(out);
        unsafe { *out = (*w).0.achieved_accuracy };
        Ok(CeStatus::Ok)
    })
}

/// Save the weights in the text interchange format.
#[no_mangle]
pub unsafe extern "C" fn ce_weights_save(w: *const CeWeights, path: *const c_char) -> CeStatus {
    guard(|| {
        require!(w);
        require!(path);
        let path = unsafe { path_arg(path) }?;
        unsafe { &(*w).0 }.save(&path)?;
        Ok(CeStatus::Ok)
    })
}

/// Load weights previously written by ce_weights_save().
#[no_mangle]
pub unsafe extern "C" fn ce_weights_load(
    path: *const c_char,
    out: *mut *mut CeWeights,
) -> CeStatus {
    guard(|| {
        require!(path);
        require!(out);
        let path = unsafe { path_arg(path) }?;
        let w = EnsembleWeights::load(&path)?;
        unsafe { write_out(out, CeWeights(w)) };
        Ok(CeStatus::Ok)
    })
}

/// Release a weights handle (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn ce_weights_free(w: *mut CeWeights) {
    unsafe { free_handle(w) };
}
