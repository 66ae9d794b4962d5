use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::estimator::{chain_to_tprime_in_place, estimate_gradients, Estimator};
use super::rng::{fill_standard_normal, fit_rng};
use super::state::{Parameterization, VariationalState};
use super::stopping::{is_diverging, StopDecision, StoppingRule};
use crate::error::{Error, Result};
use crate::linalg::{CholeskyFactor, SparsityPattern};
use crate::models::TargetModel;

/// Window length and patience used throughout the experiments.
pub const DEFAULT_WINDOW: usize = 2500;
pub const DEFAULT_PATIENCE: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Covariance factor restricted to the diagonal.
    Alg1MeanField,
    /// Full lower-triangular covariance factor.
    Alg1Unrestricted,
    /// Sparse precision factor on the model's recommended pattern.
    Alg2Sparse,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Alg1MeanField => "alg1-mf",
            Algorithm::Alg1Unrestricted => "alg1-full",
            Algorithm::Alg2Sparse => "alg2",
        }
    }

    pub fn parameterization(self) -> Parameterization {
        match self {
            Algorithm::Alg2Sparse => Parameterization::Precision,
            _ => Parameterization::Covariance,
        }
    }

    pub fn pattern_for<M: TargetModel + ?Sized>(self, model: &M) -> Result<SparsityPattern> {
        match self {
            Algorithm::Alg1MeanField => SparsityPattern::diagonal(model.dim()),
            Algorithm::Alg1Unrestricted => SparsityPattern::dense(model.dim()),
            Algorithm::Alg2Sparse => model.recommended_pattern(),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alg1-mf" | "alg1-meanfield" => Ok(Algorithm::Alg1MeanField),
            "alg1-full" | "alg1-unrestricted" => Ok(Algorithm::Alg1Unrestricted),
            "alg2" | "alg2-sparse" => Ok(Algorithm::Alg2Sparse),
            _ => Err(Error::InvalidConfig(format!("unknown algorithm `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub algorithm: Algorithm,
    pub estimator: Estimator,
    /// Hard cap `N` on iterations.
    pub max_iterations: usize,
    /// Iterations `F` per lower-bound window.
    pub window: usize,
    /// Consecutive sub-maximum windows `M` before stopping.
    pub patience: usize,
    pub seed: u64,
    /// Draws of `s` averaged per iteration.
    pub draws_per_iteration: usize,
}

impl FitConfig {
    pub fn new(algorithm: Algorithm, estimator: Estimator, seed: u64) -> Self {
        Self {
            algorithm,
            estimator,
            max_iterations: 100 * DEFAULT_WINDOW,
            window: DEFAULT_WINDOW,
            patience: DEFAULT_PATIENCE,
            seed,
            draws_per_iteration: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.patience == 0 || self.draws_per_iteration == 0 {
            return Err(Error::InvalidConfig(
                "window, patience and draws per iteration must be positive".into(),
            ));
        }
        if self.max_iterations < self.window {
            return Err(Error::InvalidConfig(format!(
                "max iterations {} is smaller than the window {}",
                self.max_iterations, self.window
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    StoppedByCriterion,
    Diverged,
    MaxIterations,
}

impl Termination {
    pub fn tag(self) -> &'static str {
        match self {
            Termination::StoppedByCriterion => "stopped-by-criterion",
            Termination::Diverged => "diverged",
            Termination::MaxIterations => "max-iterations",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Termination {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stopped-by-criterion" => Ok(Termination::StoppedByCriterion),
            "diverged" => Ok(Termination::Diverged),
            "max-iterations" => Ok(Termination::MaxIterations),
            _ => Err(Error::Format(format!("unknown termination `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub algorithm: Algorithm,
    pub estimator: Estimator,
    pub seed: u64,
    pub window: usize,
    pub patience: usize,
    pub mu: Vec<f64>,
    pub factor: CholeskyFactor,
    /// Window-averaged lower-bound estimates, one per completed window.
    pub lbar_trace: Vec<f64>,
    pub termination: Termination,
    pub iterations: usize,
}

impl FitResult {
    pub fn parameterization(&self) -> Parameterization {
        self.algorithm.parameterization()
    }

    /// State at the fitted `(mu, factor)` with fresh optimizer accumulators.
    pub fn state(&self) -> Result<VariationalState> {
        VariationalState::from_parts(self.parameterization(), self.mu.clone(), self.factor.clone())
    }

    /// Marginal variances of the fitted Gaussian.
    pub fn marginal_variances(&self) -> Result<Vec<f64>> {
        match self.parameterization() {
            Parameterization::Precision => self.factor.marginal_variances(),
            Parameterization::Covariance => {
                // diag(L L') is the squared norm of each row of L
                let mut var = vec![0.0; self.factor.dim()];
                for ((i, _), v) in self.factor.pattern().entries().zip(self.factor.values()) {
                    var[i] += v * v;
                }
                Ok(var)
            }
        }
    }
}

/// Runs the stochastic gradient fit from `mu = 0`, factor = identity.
///
/// Each iteration draws `s`, forms `theta`, estimates the gradients with the
/// configured estimator, maps the factor gradient to the log-diagonal
/// parameterization and takes an ADADELTA step for `mu` and `T'`. Every
/// `window` iterations the average lower-bound estimate is appended to the
/// trace and fed to the stopping rule.
///
/// Iterations where the model returns a non-finite value are skipped; more
/// than a full window of them in a row ends the fit as diverged, as does a
/// factor whose diagonal underflows to zero.
pub fn run_fit<M: TargetModel + ?Sized>(model: &M, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let pattern = Arc::new(config.algorithm.pattern_for(model)?);
    if pattern.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            context: "pattern",
            expected: model.dim(),
            got: pattern.dim(),
        });
    }
    let d = model.dim();
    let mut state = VariationalState::initial(config.algorithm.parameterization(), pattern.clone());
    let mut rng = fit_rng(config.seed);
    let mut stopper = StoppingRule::new(config.patience);
    let mut trace = Vec::new();
    let mut s = vec![0.0; d];
    let mut g_mu = vec![0.0; d];
    let mut g_factor = vec![0.0; pattern.nnz()];
    let (mut window_sum, mut window_count) = (0.0, 0usize);
    let mut nonfinite_run = 0usize;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    let draws = config.draws_per_iteration;

    for t in 1..=config.max_iterations {
        iterations = t;
        g_mu.fill(0.0);
        g_factor.fill(0.0);
        let mut lower_bound = 0.0;
        let mut finite = true;
        let mut singular = false;
        for _ in 0..draws {
            fill_standard_normal(&mut rng, &mut s);
            let est = match estimate_gradients(&state, model, &s, config.estimator) {
                Ok(est) => est,
                Err(Error::SingularFactor { .. }) => {
                    singular = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            finite &= est.is_finite() && est.lower_bound.is_finite();
            if !finite {
                break;
            }
            accumulate(&mut g_mu, &est.g_mu, draws);
            accumulate(&mut g_factor, &est.g_factor, draws);
            lower_bound += est.lower_bound / draws as f64;
        }

        if singular {
            termination = Termination::Diverged;
            break;
        }
        if finite {
            chain_to_tprime_in_place(&mut g_factor, state.factor());
            if state.apply_gradients(&g_mu, &g_factor).is_err() {
                termination = Termination::Diverged;
                break;
            }
            debug_assert!((0..d).all(|j| state.factor().diag(j) > 0.0));
            nonfinite_run = 0;
            window_sum += lower_bound;
            window_count += 1;
        } else {
            nonfinite_run += 1;
            if nonfinite_run > config.window {
                termination = Termination::Diverged;
                break;
            }
        }

        if t % config.window == 0 {
            let lbar = if window_count > 0 {
                window_sum / window_count as f64
            } else {
                f64::NEG_INFINITY
            };
            trace.push(lbar);
            window_sum = 0.0;
            window_count = 0;
            if stopper.observe(lbar) == StopDecision::Stop {
                termination = if is_diverging(&trace, config.patience) {
                    Termination::Diverged
                } else {
                    Termination::StoppedByCriterion
                };
                break;
            }
        }
    }

    let (mu, factor) = state.into_parts();
    Ok(FitResult {
        algorithm: config.algorithm,
        estimator: config.estimator,
        seed: config.seed,
        window: config.window,
        patience: config.patience,
        mu,
        factor,
        lbar_trace: trace,
        termination,
        iterations,
    })
}

fn accumulate(acc: &mut [f64], g: &[f64], draws: usize) {
    if draws == 1 {
        acc.copy_from_slice(g);
    } else {
        let w = 1.0 / draws as f64;
        for (a, v) in acc.iter_mut().zip(g) {
            *a += w * v;
        }
    }
}
