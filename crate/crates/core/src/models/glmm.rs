//! Generalized linear mixed model with per-subject random effects.
//!
//! `g(mu_ij) = X_ij' beta + Z_ij' b_i`, `b_i ~ N(0, W W')`, `beta ~ N(0, s_b I)`
//! and `zeta = vech(W*) ~ N(0, s_z I)` where `W*` equals `W` off the diagonal
//! and `log W_ii` on it. The parameter vector is `(b_1, ..., b_n, beta, zeta)`.

use super::{sigmoid, softplus, ParamBlock, TargetModel};
use crate::error::{Error, Result};
use crate::linalg::SparsityPattern;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlmmFamily {
    /// Bernoulli response, logit link: `h1(x) = log(1 + e^x)`.
    BernoulliLogit,
    /// Poisson response, log link: `h1(x) = e^x`.
    PoissonLog,
}

impl GlmmFamily {
    /// Log-partition `h1` and its derivative.
    #[inline]
    fn cumulant(self, eta: f64) -> (f64, f64) {
        match self {
            GlmmFamily::BernoulliLogit => (softplus(eta), sigmoid(eta)),
            GlmmFamily::PoissonLog => {
                let e = eta.exp();
                (e, e)
            }
        }
    }
}

/// Observations of one subject. `x` and `z` are row-major with one row per
/// observation.
#[derive(Clone, Debug, PartialEq)]
pub struct Subject {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

impl Subject {
    pub fn n_obs(&self) -> usize {
        self.y.len()
    }
}

#[derive(Clone, Debug)]
pub struct GlmmSpec {
    family: GlmmFamily,
    k_beta: usize,
    p: usize,
    subjects: Vec<Subject>,
    sigma2_beta: f64,
    sigma2_zeta: f64,
    beta_names: Vec<String>,
}

/// Length of `vech` of a `p x p` matrix.
pub fn vech_len(p: usize) -> usize {
    p * (p + 1) / 2
}

/// Rebuilds `W` (row-major, `p x p`, lower-triangular) from `zeta`: the
/// inverse of column-major `vech`, then exponentiation of the diagonal.
pub fn decode_zeta(zeta: &[f64], p: usize) -> Result<Vec<f64>> {
    if zeta.len() != vech_len(p) {
        return Err(Error::DimensionMismatch {
            context: "decode_zeta",
            expected: vech_len(p),
            got: zeta.len(),
        });
    }
    let mut w = vec![0.0; p * p];
    let mut k = 0;
    for j in 0..p {
        for i in j..p {
            w[i * p + j] = if i == j { zeta[k].exp() } else { zeta[k] };
            k += 1;
        }
    }
    Ok(w)
}

/// Inverse of [`decode_zeta`]. Only the lower triangle of `w` is read.
pub fn encode_zeta(w: &[f64], p: usize) -> Result<Vec<f64>> {
    if w.len() != p * p {
        return Err(Error::DimensionMismatch { context: "encode_zeta", expected: p * p, got: w.len() });
    }
    let mut zeta = Vec::with_capacity(vech_len(p));
    for j in 0..p {
        for i in j..p {
            let v = w[i * p + j];
            if i == j && v <= 0.0 {
                return Err(Error::InvalidModel(format!("W[{i},{i}] = {v} is not positive")));
            }
            zeta.push(if i == j { v.ln() } else { v });
        }
    }
    Ok(zeta)
}

impl GlmmSpec {
    pub fn new(
        family: GlmmFamily,
        k_beta: usize,
        p: usize,
        subjects: Vec<Subject>,
        sigma2_beta: f64,
        sigma2_zeta: f64,
    ) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::InvalidModel("at least one subject is required".into()));
        }
        if p == 0 {
            return Err(Error::InvalidModel("random-effect dimension must be positive".into()));
        }
        if !(sigma2_beta > 0.0 && sigma2_zeta > 0.0) {
            return Err(Error::InvalidModel("prior variances must be positive".into()));
        }
        for (i, s) in subjects.iter().enumerate() {
            let n = s.n_obs();
            if n == 0 {
                return Err(Error::InvalidModel(format!("subject {} has no observations", i + 1)));
            }
            if s.x.len() != n * k_beta || s.z.len() != n * p {
                return Err(Error::InvalidModel(format!(
                    "subject {}: covariate lengths inconsistent with {n} observations",
                    i + 1
                )));
            }
            let finite = s.y.iter().chain(&s.x).chain(&s.z).all(|v| v.is_finite());
            if !finite {
                return Err(Error::InvalidModel(format!("subject {} has non-finite data", i + 1)));
            }
        }
        let beta_names = (1..=k_beta).map(|j| format!("beta[{j}]")).collect();
        Ok(Self { family, k_beta, p, subjects, sigma2_beta, sigma2_zeta, beta_names })
    }

    /// Attaches covariate names used when labelling `beta`.
    pub fn with_beta_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.k_beta {
            return Err(Error::InvalidModel(format!(
                "{} covariate names for {} fixed effects",
                names.len(),
                self.k_beta
            )));
        }
        self.beta_names = names;
        Ok(self)
    }

    pub fn family(&self) -> GlmmFamily {
        self.family
    }
    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }
    pub fn k_beta(&self) -> usize {
        self.k_beta
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }
    pub fn n_observations(&self) -> usize {
        self.subjects.iter().map(Subject::n_obs).sum()
    }
    pub fn sigma2_beta(&self) -> f64 {
        self.sigma2_beta
    }
    pub fn sigma2_zeta(&self) -> f64 {
        self.sigma2_zeta
    }
    pub fn beta_names(&self) -> &[String] {
        &self.beta_names
    }

    fn split<'a>(&self, theta: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        assert_eq!(theta.len(), self.dim(), "parameter vector length");
        let (b, rest) = theta.split_at(self.subjects.len() * self.p);
        let (beta, zeta) = rest.split_at(self.k_beta);
        (b, beta, zeta)
    }

    /// Shared evaluation. When `grad` is given it receives the gradient.
    fn evaluate(&self, theta: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let (p, k) = (self.p, self.k_beta);
        let n = self.subjects.len();
        let (b, beta, zeta) = self.split(theta);
        let w = decode_zeta(zeta, p).expect("zeta length fixed by dim");

        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        // A = sum_i W^{-T} W^{-1} b_i b_i' W^{-T}, lower triangle only
        let mut a = vec![0.0; p * p];
        let mut u = vec![0.0; p];
        let mut v = vec![0.0; p];
        let mut loglik = 0.0;
        let mut quad = 0.0;

        for (i, subj) in self.subjects.iter().enumerate() {
            let bi = &b[i * p..(i + 1) * p];
            for (obs, &y) in subj.y.iter().enumerate() {
                let x = &subj.x[obs * k..(obs + 1) * k];
                let z = &subj.z[obs * p..(obs + 1) * p];
                let eta = dot(x, beta) + dot(z, bi);
                let (h1, dh1) = self.family.cumulant(eta);
                loglik += y * eta - h1;
                if let Some(g) = grad.as_deref_mut() {
                    let r = y - dh1;
                    for (gb, zr) in g[i * p..(i + 1) * p].iter_mut().zip(z) {
                        *gb += r * zr;
                    }
                    for (gb, xr) in g[n * p..n * p + k].iter_mut().zip(x) {
                        *gb += r * xr;
                    }
                }
            }
            // u = W^{-1} b_i
            for r in 0..p {
                let mut acc = bi[r];
                for c in 0..r {
                    acc -= w[r * p + c] * u[c];
                }
                u[r] = acc / w[r * p + r];
            }
            quad += dot(&u, &u);
            if let Some(g) = grad.as_deref_mut() {
                // v = W^{-T} u
                for r in (0..p).rev() {
                    let mut acc = u[r];
                    for c in r + 1..p {
                        acc -= w[c * p + r] * v[c];
                    }
                    v[r] = acc / w[r * p + r];
                }
                for (gb, vr) in g[i * p..(i + 1) * p].iter_mut().zip(&v) {
                    *gb -= vr;
                }
                for r in 0..p {
                    for c in 0..=r {
                        a[r * p + c] += v[r] * u[c];
                    }
                }
            }
        }

        let mut log_det_w = 0.0;
        let mut kz = 0;
        for j in 0..p {
            log_det_w += zeta[kz];
            kz += p - j;
        }

        if let Some(g) = grad {
            let gbeta = &mut g[n * p..n * p + k];
            for (gb, bj) in gbeta.iter_mut().zip(beta) {
                *gb -= bj / self.sigma2_beta;
            }
            let gzeta = &mut g[n * p + k..];
            let mut kz = 0;
            for j in 0..p {
                for r in j..p {
                    gzeta[kz] = if r == j {
                        -(n as f64) + w[r * p + r] * a[r * p + r]
                    } else {
                        a[r * p + j]
                    } - zeta[kz] / self.sigma2_zeta;
                    kz += 1;
                }
            }
        }

        loglik - n as f64 * log_det_w - 0.5 * quad
            - dot(beta, beta) / (2.0 * self.sigma2_beta)
            - dot(zeta, zeta) / (2.0 * self.sigma2_zeta)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl TargetModel for GlmmSpec {
    fn dim(&self) -> usize {
        self.subjects.len() * self.p + self.k_beta + vech_len(self.p)
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
        SparsityPattern::glmm(self.subjects.len(), self.p, self.k_beta + vech_len(self.p))
    }

    fn blocks(&self) -> Vec<ParamBlock> {
        let nb = self.subjects.len() * self.p;
        vec![
            ParamBlock::new("b", 0..nb),
            ParamBlock::new("beta", nb..nb + self.k_beta),
            ParamBlock::new("zeta", nb + self.k_beta..self.dim()),
        ]
    }

    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        for i in 1..=self.subjects.len() {
            for r in 1..=self.p {
                names.push(if self.p == 1 { format!("b[{i}]") } else { format!("b[{i},{r}]") });
            }
        }
        names.extend(self.beta_names.iter().cloned());
        for j in 1..=self.p {
            for r in j..=self.p {
                names.push(format!("zeta[{r},{j}]"));
            }
        }
        names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(family: GlmmFamily, y: f64) -> GlmmSpec {
        let s = Subject { y: vec![y], x: vec![1.0], z: vec![1.0] };
        GlmmSpec::new(family, 1, 1, vec![s], 100.0, 100.0).unwrap()
    }

    #[test]
    fn poisson_zero_point() {
        let m = single(GlmmFamily::PoissonLog, 0.0);
        assert_eq!(m.log_h(&[0.0, 0.0, 0.0]), -1.0);
    }

    #[test]
    fn logit_zero_point() {
        let m = single(GlmmFamily::BernoulliLogit, 1.0);
        assert!((m.log_h(&[0.0, 0.0, 0.0]) + 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn poisson_zero_point_gradient() {
        let m = single(GlmmFamily::PoissonLog, 1.0);
        assert_eq!(m.gradient(&[0.0, 0.0, 0.0]), vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn prior_gradient_scales_with_inverse_variance() {
        let s = Subject { y: vec![0.0], x: vec![0.0], z: vec![1.0] };
        let a = GlmmSpec::new(GlmmFamily::PoissonLog, 1, 1, vec![s.clone()], 100.0, 100.0).unwrap();
        let b = GlmmSpec::new(GlmmFamily::PoissonLog, 1, 1, vec![s], 200.0, 100.0).unwrap();
        let theta = [0.0, 3.0, 0.0];
        // x = 0 so beta enters only through its prior
        assert_eq!(a.gradient(&theta)[1], -0.03);
        assert_eq!(b.gradient(&theta)[1], -0.015);
    }

    #[test]
    fn zeta_decoding() {
        assert_eq!(decode_zeta(&[0.0], 1).unwrap(), vec![1.0]);
        assert_eq!(decode_zeta(&[0.0, 3.0, 0.0], 2).unwrap(), vec![1.0, 0.0, 3.0, 1.0]);
        assert!(decode_zeta(&[0.0, 1.0], 2).is_err());
        let zeta = [0.3, -1.2, 0.7, 2.0, -0.1, 0.05];
        let back = encode_zeta(&decode_zeta(&zeta, 3).unwrap(), 3).unwrap();
        for (a, b) in back.iter().zip(zeta) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn validation() {
        let good = Subject { y: vec![1.0], x: vec![1.0], z: vec![1.0] };
        assert!(GlmmSpec::new(GlmmFamily::PoissonLog, 1, 1, vec![], 1.0, 1.0).is_err());
        assert!(GlmmSpec::new(GlmmFamily::PoissonLog, 2, 1, vec![good.clone()], 1.0, 1.0).is_err());
        assert!(GlmmSpec::new(GlmmFamily::PoissonLog, 1, 1, vec![good.clone()], 0.0, 1.0).is_err());
        let empty = Subject { y: vec![], x: vec![], z: vec![] };
        assert!(GlmmSpec::new(GlmmFamily::PoissonLog, 1, 1, vec![empty], 1.0, 1.0).is_err());
        let m = GlmmSpec::new(GlmmFamily::PoissonLog, 1, 1, vec![good], 1.0, 1.0).unwrap();
        assert!(m.clone().with_beta_names(vec![]).is_err());
        assert_eq!(m.param_names(), vec!["b[1]", "beta[1]", "zeta[1,1]"]);
    }

    #[test]
    fn poisson_overflow_is_not_clipped() {
        let m = single(GlmmFamily::PoissonLog, 0.0);
        assert!(!m.log_h(&[0.0, 1000.0, 0.0]).is_finite());
    }

    #[test]
    fn recommended_pattern_dimensions() {
        let s = Subject { y: vec![1.0], x: vec![1.0, 2.0], z: vec![1.0, 0.5] };
        let m = GlmmSpec::new(GlmmFamily::PoissonLog, 2, 2, vec![s.clone(), s], 100.0, 100.0).unwrap();
        assert_eq!(m.dim(), 4 + 2 + 3);
        assert_eq!(m.recommended_pattern().unwrap(), SparsityPattern::glmm(2, 2, 5).unwrap());
    }
}
