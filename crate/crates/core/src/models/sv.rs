//! Stochastic volatility model.
//!
//! `y_t ~ N(0, exp(lambda + sigma b_t))` with `sigma = e^alpha`, a stationary
//! AR(1) log-volatility `b_1 ~ N(0, 1/(1 - phi^2))`,
//! `b_{t+1} | b_t ~ N(phi b_t, 1)` for `t = 1..n-1`, `phi = e^psi / (e^psi + 1)`,
//! and independent normal priors on `alpha`, `lambda`, `psi`.
//! Parameters are ordered `(b_1, ..., b_n, alpha, lambda, psi)`.

use super::{sigmoid, softplus, ParamBlock, TargetModel};
use crate::error::{Error, Result};
use crate::linalg::SparsityPattern;

/// Default prior variance for `alpha`, `lambda` and `psi`.
pub const DEFAULT_PRIOR_VARIANCE: f64 = 100.0;

#[derive(Clone, Debug)]
pub struct SvSpec {
    y: Vec<f64>,
    sigma2_alpha: f64,
    sigma2_lambda: f64,
    sigma2_psi: f64,
}

impl SvSpec {
    /// Model for mean-corrected returns with the default prior variances.
    pub fn new(y: Vec<f64>) -> Result<Self> {
        Self::with_priors(y, DEFAULT_PRIOR_VARIANCE, DEFAULT_PRIOR_VARIANCE, DEFAULT_PRIOR_VARIANCE)
    }

    pub fn with_priors(y: Vec<f64>, sigma2_alpha: f64, sigma2_lambda: f64, sigma2_psi: f64) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::InvalidModel("at least two observations are required".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("returns must be finite".into()));
        }
        if !(sigma2_alpha > 0.0 && sigma2_lambda > 0.0 && sigma2_psi > 0.0) {
            return Err(Error::InvalidModel("prior variances must be positive".into()));
        }
        Ok(Self { y, sigma2_alpha, sigma2_lambda, sigma2_psi })
    }

    pub fn returns(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn prior_variances(&self) -> (f64, f64, f64) {
        (self.sigma2_alpha, self.sigma2_lambda, self.sigma2_psi)
    }

    fn evaluate(&self, theta: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let n = self.y.len();
        assert_eq!(theta.len(), n + 3, "parameter vector length");
        let b = &theta[..n];
        let (alpha, lambda, psi) = (theta[n], theta[n + 1], theta[n + 2]);
        let sigma = alpha.exp();
        let phi = sigmoid(psi);
        // log(1 - phi^2) = log(1 - phi) + log(1 + phi), with log(1 - phi) = -softplus(psi)
        let log_one_minus_phi2 = -softplus(psi) + phi.ln_1p();
        let one_minus_phi2 = log_one_minus_phi2.exp();

        let mut sum_b = 0.0;
        let mut obs = 0.0;
        let mut obs_b = 0.0;
        let mut ar = 0.0;
        let mut ar_cross = 0.0;
        for t in 0..n {
            let e = self.y[t] * self.y[t] * (-lambda - sigma * b[t]).exp();
            sum_b += b[t];
            obs += e;
            obs_b += e * b[t];
            if t + 1 < n {
                let innov = b[t + 1] - phi * b[t];
                ar += innov * innov;
                ar_cross += innov * b[t];
            }
        }

        if let Some(g) = grad {
            for t in 0..n {
                let e = self.y[t] * self.y[t] * (-lambda - sigma * b[t]).exp();
                let mut gt = 0.5 * sigma * (e - 1.0);
                if t + 1 < n {
                    gt += phi * (b[t + 1] - phi * b[t]);
                }
                if t > 0 {
                    gt -= b[t] - phi * b[t - 1];
                } else {
                    gt -= one_minus_phi2 * b[0];
                }
                g[t] = gt;
            }
            g[n] = 0.5 * sigma * obs_b - 0.5 * sigma * sum_b - alpha / self.sigma2_alpha;
            g[n + 1] = -0.5 * n as f64 + 0.5 * obs - lambda / self.sigma2_lambda;
            let dphi = phi * (1.0 - phi);
            g[n + 2] = (phi * b[0] * b[0] - phi / one_minus_phi2 + ar_cross) * dphi - psi / self.sigma2_psi;
        }

        -0.5 * n as f64 * lambda - 0.5 * sigma * sum_b - 0.5 * obs - 0.5 * ar
            + 0.5 * log_one_minus_phi2
            - 0.5 * one_minus_phi2 * b[0] * b[0]
            - alpha * alpha / (2.0 * self.sigma2_alpha)
            - lambda * lambda / (2.0 * self.sigma2_lambda)
            - psi * psi / (2.0 * self.sigma2_psi)
    }
}

impl TargetModel for SvSpec {
    fn dim(&self) -> usize {
        self.y.len() + 3
    }

    fn log_h(&self, theta: &[f64]) -> f64 {
        self.evaluate(theta, None)
    }

    fn grad_log_h(&self, theta: &[f64], grad: &mut [f64]) {
        self.evaluate(theta, Some(grad));
    }

    fn log_h_and_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        self.evaluate(theta, Some(grad))
    }

    fn recommended_pattern(&self) -> Result<SparsityPattern> {
        SparsityPattern::ssm(self.y.len(), 1, 3)
    }

    fn blocks(&self) -> Vec<ParamBlock> {
        let n = self.y.len();
        vec![
            ParamBlock::new("b", 0..n),
            ParamBlock::new("alpha", n..n + 1),
            ParamBlock::new("lambda", n + 1..n + 2),
            ParamBlock::new("psi", n + 2..n + 3),
        ]
    }

    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.y.len()).map(|t| format!("b[{t}]")).collect();
        names.extend(["alpha", "lambda", "psi"].map(String::from));
        names
    }
}
