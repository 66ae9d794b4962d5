//! Single-draw stochastic estimates of the lower bound and its gradients.
//!
//! With `s ~ N(0, I)` and `theta = mu + T^{-T} s` (precision form), writing
//! `x = T^{-T} s` and `grad = grad log h(theta)`:
//!
//! * family 1: `g_mu = grad`, `g_T = -x (T^{-1} grad)' - diag(1/T_ii)`;
//! * family 2: `g_mu = grad + T s`, `g_T = -x (T^{-1} g_mu)'`.
//!
//! Both are restricted to the pattern of `T`, so the outer products are only
//! ever formed at stored positions. Family 2 replaces the analytic entropy
//! gradient by its sampled counterpart; for an exactly Gaussian target at the
//! optimum it is identically zero.
//!
//! The covariance form (`theta = mu + L s`) uses `g_mu = grad`,
//! `g_L = grad s' + diag(1/L_ii)` for family 1 and
//! `g_mu = grad + L^{-T} s`, `g_L = g_mu s'` for family 2.

use std::f64::consts::PI;
use std::str::FromStr;

use super::state::{Parameterization, VariationalState};
use crate::error::{Error, Result};
use crate::linalg::{count_touches, CholeskyFactor};
use crate::models::TargetModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// Entropy term evaluated analytically.
    Family1,
    /// Entropy gradient sampled alongside the model gradient.
    Family2,
}

impl Estimator {
    pub fn tag(self) -> &'static str {
        match self {
            Estimator::Family1 => "1",
            Estimator::Family2 => "2",
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Estimator::Family1),
            "2" => Ok(Estimator::Family2),
            _ => Err(Error::InvalidConfig(format!("unknown estimator `{s}` (expected 1 or 2)"))),
        }
    }
}

/// One draw's worth of estimates.
#[derive(Clone, Debug)]
pub struct GradientEstimate {
    pub theta: Vec<f64>,
    /// `log h(theta)`.
    pub log_h: f64,
    pub g_mu: Vec<f64>,
    /// Gradient with respect to the factor values, aligned with its pattern.
    pub g_factor: Vec<f64>,
    /// Unbiased single-draw lower-bound estimate at the current state.
    pub lower_bound: f64,
}

impl GradientEstimate {
    /// False when the model returned a non-finite value or gradient.
    pub fn is_finite(&self) -> bool {
        self.log_h.is_finite()
            && self.g_mu.iter().all(|v| v.is_finite())
            && self.g_factor.iter().all(|v| v.is_finite())
    }
}

/// Gradient estimates at `state` for the standard normal draw `s`.
pub fn estimate_gradients<M: TargetModel + ?Sized>(
    state: &VariationalState,
    model: &M,
    s: &[f64],
    estimator: Estimator,
) -> Result<GradientEstimate> {
    let d = state.dim();
    if s.len() != d || model.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "estimate_gradients",
            expected: d,
            got: if s.len() != d { s.len() } else { model.dim() },
        });
    }
    let factor = state.factor();
    let mut theta = vec![0.0; d];
    state.sample_theta(s, &mut theta)?;
    let mut grad = vec![0.0; d];
    let log_h = model.log_h_and_grad(&theta, &mut grad);
    let lower_bound = lower_bound_from(state, log_h, s);

    let (g_mu, g_factor) = match state.parameterization() {
        Parameterization::Precision => {
            // x = theta - mu = T^{-T} s
            let x: Vec<f64> = theta.iter().zip(state.mu()).map(|(t, m)| t - m).collect();
            let g_mu = match estimator {
                Estimator::Family1 => grad,
                Estimator::Family2 => {
                    let ts = factor.multiply(s)?;
                    grad.iter().zip(&ts).map(|(g, t)| g + t).collect()
                }
            };
            let w = factor.solve_direct(&g_mu)?;
            let mut g_t = outer_on_pattern(factor, &x, &w, -1.0);
            if estimator == Estimator::Family1 {
                add_inverse_diagonal(factor, &mut g_t, -1.0);
            }
            (g_mu, g_t)
        }
        Parameterization::Covariance => {
            let g_mu = match estimator {
                Estimator::Family1 => grad,
                Estimator::Family2 => {
                    let v = factor.solve_transposed(s)?;
                    grad.iter().zip(&v).map(|(g, v)| g + v).collect()
                }
            };
            let mut g_l = outer_on_pattern(factor, &g_mu, s, 1.0);
            if estimator == Estimator::Family1 {
                add_inverse_diagonal(factor, &mut g_l, 1.0);
            }
            (g_mu, g_l)
        }
    };
    Ok(GradientEstimate { theta, log_h, g_mu, g_factor, lower_bound })
}

/// `scale * a_i * b_j` at every stored position `(i, j)`.
fn outer_on_pattern(factor: &CholeskyFactor, a: &[f64], b: &[f64], scale: f64) -> Vec<f64> {
    let pattern = factor.pattern();
    let (col_ptr, row_idx) = (pattern.col_ptr(), pattern.row_idx());
    let mut out = vec![0.0; pattern.nnz()];
    for (j, &bj) in b.iter().enumerate() {
        let sb = scale * bj;
        for k in col_ptr[j]..col_ptr[j + 1] {
            out[k] = a[row_idx[k]] * sb;
        }
    }
    count_touches(out.len());
    out
}

fn add_inverse_diagonal(factor: &CholeskyFactor, g: &mut [f64], sign: f64) {
    let pattern = factor.pattern();
    for j in 0..pattern.dim() {
        let k = pattern.diag_slot(j);
        g[k] += sign / factor.values()[k];
    }
}

/// Gradient with respect to `T'` from the gradient with respect to `T`:
/// off-diagonal entries unchanged, diagonal entries multiplied by `T_ii`.
pub fn chain_to_tprime(g_factor: &[f64], factor: &CholeskyFactor) -> Vec<f64> {
    let mut g = g_factor.to_vec();
    chain_to_tprime_in_place(&mut g, factor);
    g
}

pub fn chain_to_tprime_in_place(g: &mut [f64], factor: &CholeskyFactor) {
    let pattern = factor.pattern();
    assert_eq!(g.len(), pattern.nnz(), "gradient not aligned with pattern");
    for j in 0..pattern.dim() {
        let k = pattern.diag_slot(j);
        g[k] *= factor.values()[k];
    }
}

/// `log h(theta) + (d/2) log 2 pi -/+ log|T| + s's/2`, the single-draw
/// unbiased lower-bound estimate. The `s's/2` term is kept random so it
/// cancels against `log h` near the optimum.
pub fn lower_bound_estimate<M: TargetModel + ?Sized>(
    state: &VariationalState,
    model: &M,
    s: &[f64],
) -> Result<f64> {
    let mut theta = vec![0.0; state.dim()];
    state.sample_theta(s, &mut theta)?;
    Ok(lower_bound_from(state, model.log_h(&theta), s))
}

/// Monte-Carlo average of the lower-bound estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBoundSummary {
    pub mean: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Averages `draws` independent single-draw lower-bound estimates.
pub fn monte_carlo_lower_bound<M: TargetModel + ?Sized, R: rand::Rng + ?Sized>(
    state: &VariationalState,
    model: &M,
    draws: usize,
    rng: &mut R,
) -> Result<LowerBoundSummary> {
    if draws < 2 {
        return Err(Error::InvalidConfig("at least two draws are needed for a standard error".into()));
    }
    let mut s = vec![0.0; state.dim()];
    let mut values = Vec::with_capacity(draws);
    for _ in 0..draws {
        super::rng::fill_standard_normal(rng, &mut s);
        values.push(lower_bound_estimate(state, model, &s)?);
    }
    let n = draws as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(LowerBoundSummary { mean, std_error: (var / n).sqrt(), draws })
}

fn lower_bound_from(state: &VariationalState, log_h: f64, s: &[f64]) -> f64 {
    let d = state.dim() as f64;
    let ss: f64 = s.iter().map(|v| v * v).sum();
    log_h + 0.5 * d * (2.0 * PI).ln() + state.entropy_log_det() + 0.5 * ss
}
