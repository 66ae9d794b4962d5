//! Text format for [`FitResult`]: a `key = value` header, then `[mu]` with one
//! value per line, `[factor]` in triplet form and `[lbar]` as a two-column
//! CSV. Floats are written in shortest round-trip form so a reload is exact.

use std::io::{BufRead, Write};

use super::fit::{FitResult, Termination};
use crate::error::{Error, Result};
use crate::linalg::{read_triplets, write_triplets};

pub fn write_fit_result<W: Write>(result: &FitResult, mut out: W) -> Result<()> {
    writeln!(out, "algorithm = {}", result.algorithm)?;
    writeln!(out, "estimator = {}", result.estimator.tag())?;
    writeln!(out, "seed = {}", result.seed)?;
    writeln!(out, "termination = {}", result.termination)?;
    writeln!(out, "iterations = {}", result.iterations)?;
    writeln!(out, "window = {}", result.window)?;
    writeln!(out, "patience = {}", result.patience)?;
    writeln!(out, "dim = {}", result.mu.len())?;
    writeln!(out, "\n[mu]")?;
    for v in &result.mu {
        writeln!(out, "{v:?}")?;
    }
    writeln!(out, "\n[factor]")?;
    write_triplets(&result.factor, &mut out)?;
    writeln!(out, "\n[lbar]")?;
    writeln!(out, "window,lbar")?;
    for (i, v) in result.lbar_trace.iter().enumerate() {
        writeln!(out, "{},{v:?}", i + 1)?;
    }
    Ok(())
}

pub fn read_fit_result<R: BufRead>(input: R) -> Result<FitResult> {
    let mut header = std::collections::BTreeMap::new();
    let mut sections: Vec<(String, Vec<String>)> = Vec::new();
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            sections.push((name.to_string(), Vec::new()));
        } else if let Some((_, body)) = sections.last_mut() {
            body.push(trimmed.to_string());
        } else {
            let (k, v) = trimmed
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad header line `{trimmed}`")))?;
            header.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let get = |key: &str| {
        header
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Format(format!("missing header key `{key}`")))
    };
    let num = |key: &str| -> Result<usize> {
        get(key)?.parse().map_err(|_| Error::Format(format!("bad value for `{key}`")))
    };
    let section = |name: &str| {
        sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b)
            .ok_or_else(|| Error::Format(format!("missing section [{name}]")))
    };
    let parse_f64 = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number `{s}`")));

    let mu = section("mu")?.iter().map(|s| parse_f64(s)).collect::<Result<Vec<_>>>()?;
    let factor = read_triplets(section("factor")?.join("\n").as_bytes())?;
    let lbar_trace = section("lbar")?
        .iter()
        .skip(1)
        .map(|row| {
            let (_, v) = row.split_once(',').ok_or_else(|| Error::Format(format!("bad trace row `{row}`")))?;
            parse_f64(v)
        })
        .collect::<Result<Vec<_>>>()?;
    if mu.len() != num("dim")? || factor.dim() != mu.len() {
        return Err(Error::Format("dimension of mu and factor disagree with header".into()));
    }
    Ok(FitResult {
        algorithm: get("algorithm")?.parse()?,
        estimator: get("estimator")?.parse()?,
        seed: get("seed")?.parse().map_err(|_| Error::Format("bad seed".into()))?,
        termination: get("termination")?.parse::<Termination>()?,
        iterations: num("iterations")?,
        window: num("window")?,
        patience: num("patience")?,
        mu,
        factor,
        lbar_trace,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::{Algorithm, Estimator};
    use crate::linalg::{CholeskyFactor, SparsityPattern};

    fn sample() -> FitResult {
        let p = Arc::new(SparsityPattern::ssm(3, 1, 1).unwrap());
        let values = (0..p.nnz()).map(|k| 1.0 + 0.1 * k as f64 + 1e-17).collect();
        FitResult {
            algorithm: Algorithm::Alg2Sparse,
            estimator: Estimator::Family2,
            seed: 42,
            window: 2500,
            patience: 3,
            mu: vec![0.1, -2.0 / 3.0, 1e-300, 5.0],
            factor: CholeskyFactor::from_values(p, values).unwrap(),
            lbar_trace: vec![-10.5, -3.25, -3.3],
            termination: Termination::StoppedByCriterion,
            iterations: 7500,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let r = sample();
        let mut buf = Vec::new();
        write_fit_result(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("algorithm = alg2\nestimator = 2\nseed = 42\ntermination = stopped-by-criterion\n"));
        assert_eq!(read_fit_result(buf.as_slice()).unwrap(), r);
    }

    #[test]
    fn missing_pieces_are_reported() {
        let mut buf = Vec::new();
        write_fit_result(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(read_fit_result(text.replace("seed = 42\n", "").as_bytes()).is_err());
        assert!(read_fit_result(text.replace("[lbar]", "[other]").as_bytes()).is_err());
        assert!(read_fit_result(text.replace("dim = 4", "dim = 5").as_bytes()).is_err());
    }
}
