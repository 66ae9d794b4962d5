use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use super::TargetModel;
use crate::error::{Error, Result};
use crate::linalg::{CholeskyFactor, SparsityPattern};

/// Exactly Gaussian target `N(mean, (T* T*')^{-1})`, normalized so that the
/// optimal lower bound is zero. Used to validate the optimizers against a
/// known answer.
#[derive(Clone, Debug)]
pub struct GaussianTarget {
    mean: Vec<f64>,
    factor: CholeskyFactor,
    log_norm: f64,
}

impl GaussianTarget {
    pub fn new(mean: Vec<f64>, factor: CholeskyFactor) -> Result<Self> {
        if mean.len() != factor.dim() {
            return Err(Error::DimensionMismatch {
                context: "gaussian target mean",
                expected: factor.dim(),
                got: mean.len(),
            });
        }
        if mean.iter().chain(factor.values()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("gaussian target must be finite".into()));
        }
        let log_norm = factor.log_det() - 0.5 * factor.dim() as f64 * (2.0 * PI).ln();
        Ok(Self { mean, factor, log_norm })
    }

    /// Random well-conditioned target on `pattern`: means `U(-2, 2)`,
    /// diagonal `U(0.8, 1.5)`, off-diagonal `U(-0.3, 0.3)`.
    pub fn random<R: Rng + ?Sized>(pattern: Arc<SparsityPattern>, rng: &mut R) -> Result<Self> {
        let d = pattern.dim();
        let mean = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let values = pattern
            .entries()
            .map(|(i, j)| {
                if i == j {
                    rng.random_range(0.8..1.5)
                } else {
                    rng.random_range(-0.3..0.3)
                }
            })
            .collect();
        Self::new(mean, CholeskyFactor::from_values(pattern, values)?)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Precision Cholesky factor `T*`.
    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// `T*' (theta - mean)`.
    fn whitened(&self, theta: &[f64]) -> Vec<f64> {
        let diff: Vec<f64> = theta.iter().zip(&self.mean).map(|(t, m)| t - m).collect();
        self.factor.multiply_transposed(&diff).expect("dimension checked by caller")
    }
}

impl TargetModel for GaussianTarget {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_h(&self, theta: &[f64]) -> f64 {
        let r = self.whitened(theta);
        self.log_norm - 0.5 * r.iter().map(|v| v * v).sum::<f64>()
    }

    fn grad_log_h(&self, theta: &[f64], grad: &mut [f64]) {
        self.log_h_and_grad(theta, grad);
    }

    fn log_h_and_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let r = self.whitened(theta);
        self.factor.multiply_into(&r, grad).expect("dimension checked by caller");
        for g in grad.iter_mut() {
            *g = -*g;
        }
        self.log_norm - 0.5 * r.iter().map(|v| v * v).sum::<f64>()
    }

    fn recommended_pattern(&self) -> Result<SparsityPattern> {
        Ok(self.factor.pattern().clone())
    }
}
