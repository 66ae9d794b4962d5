//! Deterministic synthetic data: stand-ins for data sets that cannot be
//! redistributed, and scalable instances for benchmarks.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::datasets::GLMM_PRIOR_VARIANCE;
use crate::engine::{fit_rng, FitRng};
use crate::error::Result;
use crate::models::{sigmoid, GlmmFamily, GlmmSpec, Subject, SvSpec};

pub const TOENAIL_SUBJECTS: usize = 294;
pub const TOENAIL_MEASUREMENTS: usize = 1908;
/// Planned visit times in months.
pub const TOENAIL_PLANNED_MONTHS: [f64; 7] = [0.0, 1.0, 2.0, 3.0, 6.0, 9.0, 12.0];
pub const POLYPHARMACY_SUBJECTS: usize = 500;
pub const POLYPHARMACY_YEARS: usize = 7;

fn normal(rng: &mut FitRng) -> f64 {
    rng.sample(StandardNormal)
}

fn bernoulli(rng: &mut FitRng, eta: f64) -> bool {
    rng.random::<f64>() < sigmoid(eta)
}

/// Toenail-shaped CSV (`patientID,outcome,treatment,time,visit`): 294
/// patients, seven planned visits, 150 missed follow-ups so that 1908
/// measurements remain, and a logistic random-intercept outcome.
pub fn write_synthetic_toenail<W: Write>(seed: u64, out: W) -> Result<()> {
    let mut rng = fit_rng(seed);
    let mut slots: Vec<(usize, usize)> =
        (0..TOENAIL_SUBJECTS).flat_map(|i| (1..TOENAIL_PLANNED_MONTHS.len()).map(move |v| (i, v))).collect();
    slots.shuffle(&mut rng);
    let missed = TOENAIL_SUBJECTS * TOENAIL_PLANNED_MONTHS.len() - TOENAIL_MEASUREMENTS;
    let mut skip = vec![[false; 7]; TOENAIL_SUBJECTS];
    for &(i, v) in &slots[..missed] {
        skip[i][v] = true;
    }

    let mut w = csv::Writer::from_writer(out);
    w.write_record(["patientID", "outcome", "treatment", "time", "visit"])?;
    for (i, skip) in skip.iter().enumerate() {
        let trt = rng.random_bool(0.5);
        let u = 3.0 * normal(&mut rng);
        for (v, &planned) in TOENAIL_PLANNED_MONTHS.iter().enumerate() {
            let jitter = if v == 0 { 0.0 } else { rng.random_range(-0.3..0.3) };
            if skip[v] {
                continue;
            }
            let t = ((planned + jitter) * 100.0).round() / 100.0;
            let trt_f = f64::from(u8::from(trt));
            let eta = -1.6 - 0.1 * trt_f - 0.4 * t - 0.15 * trt_f * t + u;
            let outcome = if bernoulli(&mut rng, eta) { "moderate or severe" } else { "none or mild" };
            let treatment = if trt { "terbinafine" } else { "itraconazole" };
            w.write_record([
                (i + 1).to_string(),
                outcome.to_string(),
                treatment.to_string(),
                format!("{t:.2}"),
                (v + 1).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Polypharmacy-shaped CSV (`id,year,polypharmacy,gender,race,age,mhv,inptmhv`):
/// 500 subjects observed yearly for seven years.
pub fn write_synthetic_polypharmacy<W: Write>(seed: u64, out: W) -> Result<()> {
    let mut rng = fit_rng(seed);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "year", "polypharmacy", "gender", "race", "age", "mhv", "inptmhv"])?;
    for i in 0..POLYPHARMACY_SUBJECTS {
        let male = rng.random_bool(0.45);
        let race = match rng.random_range(0..10) {
            0..=6 => "white",
            7 | 8 => "black",
            _ => "other",
        };
        let age0: u32 = rng.random_range(25..70);
        let u = 2.0 * normal(&mut rng);
        let activity = rng.random_range(0.0..12.0);
        for year in 0..POLYPHARMACY_YEARS {
            let age = age0 + year as u32;
            let mhv = if rng.random_bool(0.35) { 0 } else { (activity * rng.random::<f64>() * 2.0).round() as u32 };
            let inpt = if rng.random_bool(0.85) { 0 } else { rng.random_range(1..4) };
            let [m1, m2, m3] = super::mhv_indicators(f64::from(mhv));
            let eta = -4.0 + 0.6 * f64::from(u8::from(male)) - 0.7 * f64::from(u8::from(race != "white"))
                + 0.04 * f64::from(age)
                + 0.3 * m1
                + 0.8 * m2
                + 1.1 * m3
                + 0.4 * f64::from(u8::from(inpt > 0))
                + u;
            let y = u8::from(bernoulli(&mut rng, eta));
            w.write_record([
                (i + 1).to_string(),
                (year + 1).to_string(),
                y.to_string(),
                if male { "male" } else { "female" }.to_string(),
                race.to_string(),
                age.to_string(),
                mhv.to_string(),
                inpt.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Random-intercept GLMM with covariates `(1, x, trt)`, `x ~ N(0, 1)` per
/// observation and `trt` per subject, `b_i ~ N(0, 1)`.
pub fn synthetic_glmm(family: GlmmFamily, n_subjects: usize, obs_per_subject: usize, seed: u64) -> Result<GlmmSpec> {
    let mut rng = fit_rng(seed);
    let beta = [-0.5, 0.8, -0.6];
    let subjects = (0..n_subjects)
        .map(|_| {
            let trt = f64::from(u8::from(rng.random_bool(0.5)));
            let b = normal(&mut rng);
            let mut s = Subject { y: Vec::new(), x: Vec::new(), z: Vec::new() };
            for _ in 0..obs_per_subject {
                let x = [1.0, normal(&mut rng), trt];
                let eta = beta.iter().zip(&x).map(|(b, x)| b * x).sum::<f64>() + b;
                let y = match family {
                    GlmmFamily::BernoulliLogit => f64::from(u8::from(bernoulli(&mut rng, eta))),
                    GlmmFamily::PoissonLog => poisson(&mut rng, eta.exp()),
                };
                s.y.push(y);
                s.x.extend_from_slice(&x);
                s.z.push(1.0);
            }
            s
        })
        .collect();
    GlmmSpec::new(family, 3, 1, subjects, GLMM_PRIOR_VARIANCE, GLMM_PRIOR_VARIANCE)
}

/// Knuth's multiplication method; only used for small means.
fn poisson(rng: &mut FitRng, mean: f64) -> f64 {
    let limit = (-mean).exp();
    let mut k = 0.0;
    let mut prod = rng.random::<f64>();
    while prod > limit {
        k += 1.0;
        prod *= rng.random::<f64>();
    }
    k
}

/// Mean-corrected returns simulated from the volatility model with
/// `lambda = -0.5`, `sigma = 0.4`, `phi = 0.95`.
pub fn synthetic_sv(n: usize, seed: u64) -> Result<SvSpec> {
    let mut rng = fit_rng(seed);
    let (lambda, sigma, phi) = (-0.5f64, 0.4f64, 0.95f64);
    let mut b = normal(&mut rng) / (1.0 - phi * phi).sqrt();
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        y.push((0.5 * (lambda + sigma * b)).exp() * normal(&mut rng));
        b = phi * b + normal(&mut rng);
    }
    let mean = y.iter().sum::<f64>() / n.max(1) as f64;
    y.iter_mut().for_each(|v| *v -= mean);
    SvSpec::new(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_polypharmacy_model, build_toenail_model, polypharmacy_schema, read_csv, toenail_schema};
    use crate::models::TargetModel;

    #[test]
    fn toenail_snapshot_shape() {
        let mut buf = Vec::new();
        write_synthetic_toenail(1, &mut buf).unwrap();
        let t = read_csv(buf.as_slice(), &toenail_schema()).unwrap();
        assert_eq!(t.n_rows(), TOENAIL_MEASUREMENTS);
        assert_eq!(t.n_subjects(), TOENAIL_SUBJECTS);
        let m = build_toenail_model(&t).unwrap();
        assert_eq!(m.dim(), 299);
        assert!(m.subjects().iter().any(|s| s.n_obs() < 7));
        let mut again = Vec::new();
        write_synthetic_toenail(1, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn polypharmacy_snapshot_shape() {
        let mut buf = Vec::new();
        write_synthetic_polypharmacy(2, &mut buf).unwrap();
        let t = read_csv(buf.as_slice(), &polypharmacy_schema()).unwrap();
        assert_eq!(t.n_rows(), 3500);
        let m = build_polypharmacy_model(&t).unwrap();
        assert_eq!(m.dim(), 509);
        let ones: f64 = m.subjects().iter().flat_map(|s| s.y.iter()).sum();
        assert!(ones > 200.0 && ones < 3300.0, "{ones}");
    }

    #[test]
    fn synthetic_models_are_valid() {
        let g = synthetic_glmm(GlmmFamily::BernoulliLogit, 50, 6, 3).unwrap();
        assert_eq!(g.dim(), 50 + 3 + 1);
        let p = synthetic_glmm(GlmmFamily::PoissonLog, 10, 4, 3).unwrap();
        assert!(p.subjects().iter().flat_map(|s| s.y.iter()).all(|y| *y >= 0.0 && y.fract() == 0.0));
        let sv = synthetic_sv(200, 4).unwrap();
        assert_eq!(sv.dim(), 203);
        assert!(sv.returns().iter().sum::<f64>().abs() < 1e-9);
    }
}
