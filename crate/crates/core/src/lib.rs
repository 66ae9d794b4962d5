//! Gaussian variational approximation by stochastic gradient ascent on the
//! evidence lower bound.
//!
//! The variational family is `N(mu, (T T')^{-1})` where `T` is a sparse
//! lower-triangular Cholesky factor of the precision matrix, or, for the
//! covariance-parameterized baseline, `N(mu, L L')` with `L` diagonal or full.
//! Sparsity in `T` mirrors the conditional independence structure of the
//! posterior, which keeps the per-iteration cost linear in the number of
//! latent variables for mixed models and state space models.
//!
//! * [`linalg`]: sparse factor storage and triangular solves.
//! * [`models`]: the unnormalized log posterior interface and concrete targets.
//! * [`engine`]: gradient estimators, ADADELTA, lower-bound tracking and the fit loop.
//! * [`data`]: dataset loaders and design-matrix builders.
//! * [`gradcheck`]: finite-difference verification of model gradients.

pub mod data;
pub mod engine;
pub mod error;
pub mod gradcheck;
pub mod linalg;
pub mod models;

pub use error::{Error, Result};
