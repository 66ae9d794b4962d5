//! Unnormalized log posteriors `log h(theta) = log p(theta) + log p(y | theta)`.
//!
//! Every model orders its parameter vector as latent blocks first, then the
//! global parameters, which is the ordering the pattern builders assume.

mod gaussian;
mod glmm;
mod sv;

use std::ops::Range;

pub use gaussian::GaussianTarget;
pub use glmm::{decode_zeta, encode_zeta, vech_len, GlmmFamily, GlmmSpec, Subject};
pub use sv::SvSpec;

use crate::error::Result;
use crate::linalg::SparsityPattern;

/// A named contiguous slice of the parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamBlock {
    pub name: String,
    pub range: Range<usize>,
}

impl ParamBlock {
    pub fn new(name: impl Into<String>, range: Range<usize>) -> Self {
        Self { name: name.into(), range }
    }
}

/// Target density `h(theta)` known up to a constant, with its gradient.
///
/// Implementations never clip: overflow shows up as a non-finite return value,
/// which the fit loop counts toward divergence instead of panicking.
pub trait TargetModel: Send + Sync {
    fn dim(&self) -> usize;

    fn log_h(&self, theta: &[f64]) -> f64;

    /// Writes `grad_theta log h(theta)` into `grad`.
    fn grad_log_h(&self, theta: &[f64], grad: &mut [f64]);

    /// Evaluates both at once; models override this to share intermediate work.
    fn log_h_and_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        self.grad_log_h(theta, grad);
        self.log_h(theta)
    }

    /// Sparsity pattern for the precision factor that mirrors the posterior's
    /// conditional independence structure.
    fn recommended_pattern(&self) -> Result<SparsityPattern>;

    fn blocks(&self) -> Vec<ParamBlock> {
        vec![ParamBlock::new("theta", 0..self.dim())]
    }

    /// One label per coordinate, `block[index]` by default.
    fn param_names(&self) -> Vec<String> {
        self.blocks()
            .into_iter()
            .flat_map(|b| {
                let name = b.name;
                b.range.clone().map(move |i| format!("{name}[{}]", i - b.range.start + 1))
            })
            .collect()
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.grad_log_h(theta, &mut g);
        g
    }
}

impl<M: TargetModel + ?Sized> TargetModel for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_h(&self, theta: &[f64]) -> f64 {
        (**self).log_h(theta)
    }
    fn grad_log_h(&self, theta: &[f64], grad: &mut [f64]) {
        (**self).grad_log_h(theta, grad)
    }
    fn log_h_and_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        (**self).log_h_and_grad(theta, grad)
    }
    fn recommended_pattern(&self) -> Result<SparsityPattern> {
        (**self).recommended_pattern()
    }
    fn blocks(&self) -> Vec<ParamBlock> {
        (**self).blocks()
    }
    fn param_names(&self) -> Vec<String> {
        (**self).param_names()
    }
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + e^{-x})` without overflow.
#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
