use std::sync::Arc;

use super::adadelta::Adadelta;
use crate::error::{Error, Result};
use crate::linalg::{count_touches, CholeskyFactor, SparsityPattern};

/// How the factor enters the variational density.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parameterization {
    /// `theta = mu + L s`, covariance `L L'`.
    Covariance,
    /// `theta = mu + T^{-T} s`, precision `T T'`.
    Precision,
}

/// Mean, factor and the unconstrained copy of the factor (`T'`, which equals
/// `T` off the diagonal and `log T_ii` on it), plus the optimizer state for
/// both. The pattern of the factor is fixed for the lifetime of the state.
#[derive(Clone, Debug)]
pub struct VariationalState {
    parameterization: Parameterization,
    mu: Vec<f64>,
    factor: CholeskyFactor,
    tprime: Vec<f64>,
    acc_mu: Adadelta,
    acc_factor: Adadelta,
}

impl VariationalState {
    /// `mu = 0`, factor = identity, `T' = 0`.
    pub fn initial(parameterization: Parameterization, pattern: Arc<SparsityPattern>) -> Self {
        let factor = CholeskyFactor::identity(pattern);
        Self::from_parts(parameterization, vec![0.0; factor.dim()], factor)
            .expect("identity factor is valid")
    }

    /// State at a given `(mu, factor)` with fresh optimizer accumulators.
    pub fn from_parts(parameterization: Parameterization, mu: Vec<f64>, factor: CholeskyFactor) -> Result<Self> {
        if mu.len() != factor.dim() {
            return Err(Error::DimensionMismatch {
                context: "variational mean",
                expected: factor.dim(),
                got: mu.len(),
            });
        }
        let pattern = factor.pattern();
        let mut tprime = factor.values().to_vec();
        for j in 0..pattern.dim() {
            let k = pattern.diag_slot(j);
            tprime[k] = tprime[k].ln();
        }
        let acc_mu = Adadelta::new(mu.len());
        let acc_factor = Adadelta::new(tprime.len());
        Ok(Self { parameterization, mu, factor, tprime, acc_mu, acc_factor })
    }

    pub fn parameterization(&self) -> Parameterization {
        self.parameterization
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// Unconstrained factor values aligned with the pattern.
    pub fn tprime(&self) -> &[f64] {
        &self.tprime
    }

    pub fn into_parts(self) -> (Vec<f64>, CholeskyFactor) {
        (self.mu, self.factor)
    }

    /// Draws `theta` for a standard normal `s` into `out`.
    pub fn sample_theta(&self, s: &[f64], out: &mut [f64]) -> Result<()> {
        match self.parameterization {
            Parameterization::Precision => {
                out.copy_from_slice(s);
                self.factor.solve_transposed_in_place(out)?;
            }
            Parameterization::Covariance => self.factor.multiply_into(s, out)?,
        }
        for (o, m) in out.iter_mut().zip(&self.mu) {
            *o += m;
        }
        Ok(())
    }

    /// `log q(mu + offset(s))` cancels against this term in the lower bound:
    /// `-log|T|` for the precision form, `+log|L|` for the covariance form.
    pub fn entropy_log_det(&self) -> f64 {
        match self.parameterization {
            Parameterization::Precision => -self.factor.log_det(),
            Parameterization::Covariance => self.factor.log_det(),
        }
    }

    /// Applies one ADADELTA step to `mu` and `T'` and refreshes the factor.
    ///
    /// Non-finite gradients are rejected before anything is touched. A step
    /// that overflows the factor is also an error; the mean and factor are then
    /// left as they were but the accumulators have advanced.
    pub fn apply_gradients(&mut self, g_mu: &[f64], g_tprime: &[f64]) -> Result<()> {
        if g_mu.iter().chain(g_tprime).any(|g| !g.is_finite()) {
            return Err(Error::InvalidModel("non-finite gradient".into()));
        }
        let d_mu = self.acc_mu.step(g_mu);
        let d_t = self.acc_factor.step(g_tprime);
        let pattern = self.factor.shared_pattern().clone();
        let mut tprime = self.tprime.clone();
        for (t, d) in tprime.iter_mut().zip(&d_t) {
            *t += d;
        }
        let mut values = tprime.clone();
        for j in 0..pattern.dim() {
            let k = pattern.diag_slot(j);
            values[k] = tprime[k].exp();
        }
        count_touches(2 * values.len());
        let factor = CholeskyFactor::from_values(pattern, values).and_then(|f| {
            if f.values().iter().all(|v| v.is_finite()) {
                Ok(f)
            } else {
                Err(Error::InvalidModel("factor update produced non-finite values".into()))
            }
        })?;
        let mu: Vec<f64> = self.mu.iter().zip(&d_mu).map(|(m, d)| m + d).collect();
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("mean update produced non-finite values".into()));
        }
        self.mu = mu;
        self.tprime = tprime;
        self.factor = factor;
        Ok(())
    }
}
