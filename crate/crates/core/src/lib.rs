//! Classical image-classification pipeline and expert-fusion toolkit for
//! CIFAR-10-format data.
//!
//! The crate covers four layers:
//!
//! 1. **Data** — [`dataset`] reads and writes the CIFAR-10 binary batch
//!    layout and provides deterministic stratified splits.
//! 2. **Features** — [`preprocess`] (global contrast normalization, ZCA
//!    whitening, reflective-padding augmentation) and [`pca`] (exact
//!    principal-component projections via either the covariance or the Gram
//!    matrix).
//! 3. **Classifiers** — [`neighbors`] (exact brute-force k-nearest-neighbor
//!    and nearest-centroid) and [`linear`] (multinomial logistic regression
//!    trained by mini-batch gradient descent). Both emit row-stochastic
//!    score matrices through [`experts`], which also ingests scores produced
//!    by external models from a plain-text interchange format.
//! 4. **Fusion** — [`ensemble`] combines any number of score matrices by
//!    weighted summation and finds the weights with an exhaustive,
//!    deterministic grid search (pairwise, or chained for three or more
//!    experts).
//!
//! Everything is reproducible: random choices flow from caller-supplied
//! seeds through counter-based generators, parallel loops are structured so
//! results never depend on thread count, and model files round-trip
//! bit-exactly.

// Linked for the BLAS symbols ndarray's matrix products resolve against.
use blas_src as _;

pub mod cli;
pub mod config;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod experts;
pub mod linear;
pub mod neighbors;
pub mod pca;
pub mod persist;
pub mod preprocess;
pub mod report;

pub use error::{Error, Result};
