//! Design-matrix builders for the bundled longitudinal data sets.
//!
//! Expected CSV columns:
//!
//! * epilepsy: `subject, visit, seizures, base, trt, age` where `base` is the
//!   raw 8-week baseline count, `trt` is 1 for progabide and `age` is in years;
//! * toenail: `patientID, outcome, treatment, time` with `outcome` one of
//!   `none or mild` / `moderate or severe`, `treatment` one of `itraconazole` /
//!   `terbinafine` and `time` in months;
//! * polypharmacy: `id, year, polypharmacy, gender, race, age, mhv, inptmhv`
//!   with `gender` `male`/`female`, `race` a label (`white` or other) and raw
//!   visit counts in `mhv` and `inptmhv`.

use std::fmt;
use std::str::FromStr;

use super::table::{LongitudinalTable, Schema};
use crate::error::{Error, Result};
use crate::models::{GlmmFamily, GlmmSpec, Subject};

/// Prior variance of `beta` and `zeta` in every bundled model.
pub const GLMM_PRIOR_VARIANCE: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpilepsyVariant {
    /// Random intercept, fixed effects include the fourth-visit indicator.
    I,
    /// Random intercept and slope in the coded visit.
    II,
}

impl FromStr for EpilepsyVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" => Ok(EpilepsyVariant::I),
            "II" | "2" => Ok(EpilepsyVariant::II),
            _ => Err(Error::InvalidConfig(format!("unknown epilepsy variant `{s}` (expected I or II)"))),
        }
    }
}

impl fmt::Display for EpilepsyVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EpilepsyVariant::I => "I",
            EpilepsyVariant::II => "II",
        })
    }
}

pub fn epilepsy_schema() -> Schema {
    Schema::new("subject").numeric("visit").numeric("seizures").numeric("base").numeric("trt").numeric("age")
}

pub fn toenail_schema() -> Schema {
    Schema::new("patientID").text("outcome").text("treatment").numeric("time")
}

pub fn polypharmacy_schema() -> Schema {
    Schema::new("id")
        .numeric("polypharmacy")
        .text("gender")
        .text("race")
        .numeric("age")
        .numeric("mhv")
        .numeric("inptmhv")
}

/// Visit `v` in `1..=4` coded as `-0.3, -0.1, 0.1, 0.3`.
pub fn visit_code(visit: f64) -> f64 {
    (2.0 * visit - 5.0) / 10.0
}

/// `(MHV_1, MHV_2, MHV_3)` indicators for 1-5, 6-14 and 15+ visits.
pub fn mhv_indicators(mhv: f64) -> [f64; 3] {
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    [ind((1.0..=5.0).contains(&mhv)), ind((6.0..=14.0).contains(&mhv)), ind(mhv >= 15.0)]
}

/// Data rows start on line 2 of the file.
fn parse_error(row: usize, column: &str, value: &str) -> Error {
    Error::Parse { row: row + 2, column: column.into(), value: value.into() }
}

/// Assembles subjects from per-row covariate closures.
fn assemble(
    table: &LongitudinalTable,
    k: usize,
    p: usize,
    mut row: impl FnMut(usize, &mut Vec<f64>, &mut Vec<f64>) -> Result<f64>,
) -> Result<Vec<Subject>> {
    table
        .rows_by_subject()
        .into_iter()
        .map(|rows| {
            let mut s = Subject {
                y: Vec::with_capacity(rows.len()),
                x: Vec::with_capacity(rows.len() * k),
                z: Vec::with_capacity(rows.len() * p),
            };
            for r in rows {
                let y = row(r, &mut s.x, &mut s.z)?;
                s.y.push(y);
            }
            Ok(s)
        })
        .collect()
}

/// Poisson mixed model for seizure counts.
///
/// Covariates: intercept, `Base = ln(base / 4)`, `Trt`, `Age = ln(age)` centred
/// by its mean over subjects, `Base x Trt`, then `V4` (variant I) or the coded
/// visit (variant II). Variant II adds a random slope in the coded visit.
pub fn build_epilepsy_model(table: &LongitudinalTable, variant: EpilepsyVariant) -> Result<GlmmSpec> {
    let visit = table.numeric("visit")?;
    let seizures = table.numeric("seizures")?;
    let base = table.numeric("base")?;
    let trt = table.numeric("trt")?;
    let age = table.numeric("age")?;
    for (r, (&b, &a)) in base.iter().zip(age).enumerate() {
        if b <= 0.0 {
            return Err(parse_error(r, "base", &b.to_string()));
        }
        if a <= 0.0 {
            return Err(parse_error(r, "age", &a.to_string()));
        }
    }
    let groups = table.rows_by_subject();
    let mean_log_age = groups.iter().map(|rows| age[rows[0]].ln()).sum::<f64>() / groups.len() as f64;
    let p = match variant {
        EpilepsyVariant::I => 1,
        EpilepsyVariant::II => 2,
    };
    let subjects = assemble(table, 6, p, |r, x, z| {
        let lb = (base[r] / 4.0).ln();
        let last = match variant {
            EpilepsyVariant::I => f64::from(u8::from(visit[r] == 4.0)),
            EpilepsyVariant::II => visit_code(visit[r]),
        };
        x.extend_from_slice(&[1.0, lb, trt[r], age[r].ln() - mean_log_age, lb * trt[r], last]);
        z.push(1.0);
        if variant == EpilepsyVariant::II {
            z.push(visit_code(visit[r]));
        }
        Ok(seizures[r])
    })?;
    let last_name = match variant {
        EpilepsyVariant::I => "V4",
        EpilepsyVariant::II => "Visit",
    };
    GlmmSpec::new(GlmmFamily::PoissonLog, 6, p, subjects, GLMM_PRIOR_VARIANCE, GLMM_PRIOR_VARIANCE)?
        .with_beta_names(names(&["Intercept", "Base", "Trt", "Age", "BasexTrt", last_name]))
}

/// Logistic random-intercept model for onycholysis with covariates
/// `(1, Trt, t, Trt x t)`; `Trt = 1` for terbinafine.
pub fn build_toenail_model(table: &LongitudinalTable) -> Result<GlmmSpec> {
    let outcome = table.text("outcome")?;
    let treatment = table.text("treatment")?;
    let time = table.numeric("time")?;
    let subjects = assemble(table, 4, 1, |r, x, z| {
        let y = match outcome[r].as_str() {
            "moderate or severe" => 1.0,
            "none or mild" => 0.0,
            other => return Err(parse_error(r, "outcome", other)),
        };
        let trt = match treatment[r].as_str() {
            "terbinafine" => 1.0,
            "itraconazole" => 0.0,
            other => return Err(parse_error(r, "treatment", other)),
        };
        x.extend_from_slice(&[1.0, trt, time[r], trt * time[r]]);
        z.push(1.0);
        Ok(y)
    })?;
    GlmmSpec::new(GlmmFamily::BernoulliLogit, 4, 1, subjects, GLMM_PRIOR_VARIANCE, GLMM_PRIOR_VARIANCE)?
        .with_beta_names(names(&["Intercept", "Trt", "t", "Trtxt"]))
}

/// Logistic random-intercept model for taking drugs from three or more
/// groups, with covariates `(1, Gender, Race, Age, MHV_1, MHV_2, MHV_3,
/// INPTMHV)`: `Gender = 1` if male, `Race = 0` if white, `INPTMHV = 1` if any
/// inpatient visit.
pub fn build_polypharmacy_model(table: &LongitudinalTable) -> Result<GlmmSpec> {
    let y = table.numeric("polypharmacy")?;
    let gender = table.text("gender")?;
    let race = table.text("race")?;
    let age = table.numeric("age")?;
    let mhv = table.numeric("mhv")?;
    let inpt = table.numeric("inptmhv")?;
    let subjects = assemble(table, 8, 1, |r, x, z| {
        if y[r] != 0.0 && y[r] != 1.0 {
            return Err(parse_error(r, "polypharmacy", &y[r].to_string()));
        }
        let g = match gender[r].as_str() {
            "male" => 1.0,
            "female" => 0.0,
            other => return Err(parse_error(r, "gender", other)),
        };
        let race = if race[r] == "white" { 0.0 } else { 1.0 };
        let [m1, m2, m3] = mhv_indicators(mhv[r]);
        let inpt = if inpt[r] > 0.0 { 1.0 } else { 0.0 };
        x.extend_from_slice(&[1.0, g, race, age[r], m1, m2, m3, inpt]);
        z.push(1.0);
        Ok(y[r])
    })?;
    GlmmSpec::new(GlmmFamily::BernoulliLogit, 8, 1, subjects, GLMM_PRIOR_VARIANCE, GLMM_PRIOR_VARIANCE)?
        .with_beta_names(names(&["Intercept", "Gender", "Race", "Age", "MHV_1", "MHV_2", "MHV_3", "INPTMHV"]))
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}
