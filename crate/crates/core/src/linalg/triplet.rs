//! Plain-text triplet format: a `d nnz` header line, then one
//! `row col value` line per entry with 1-based indices.

use std::io::{BufRead, Write};
use std::sync::Arc;

use super::{CholeskyFactor, SparsityPattern};
use crate::error::{Error, Result};

/// Writes the factor in storage (column-major) order. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_triplets<W: Write>(factor: &CholeskyFactor, mut out: W) -> Result<()> {
    let pattern = factor.pattern();
    writeln!(out, "{} {}", pattern.dim(), pattern.nnz())?;
    for ((i, j), v) in pattern.entries().zip(factor.values()) {
        writeln!(out, "{} {} {:?}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Reads a factor written by [`write_triplets`]. Entries may appear in any
/// order; they are re-sorted into canonical order.
pub fn read_triplets<R: BufRead>(input: R) -> Result<CholeskyFactor> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty triplet file".into()))??;
    let (dim, nnz) = parse_header(&header)?;
    let mut triplets = Vec::with_capacity(nnz);
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Format(format!("triplet line {}: `{line}`", lineno + 2));
        let mut it = line.split_whitespace();
        let row: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let col: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let value: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        if row == 0 || col == 0 || it.next().is_some() {
            return Err(bad());
        }
        triplets.push((row - 1, col - 1, value));
    }
    if triplets.len() != nnz {
        return Err(Error::Format(format!(
            "header declares {nnz} entries but {} were read",
            triplets.len()
        )));
    }
    let pattern = Arc::new(SparsityPattern::from_entries(
        dim,
        triplets.iter().map(|&(i, j, _)| (i, j)),
    )?);
    let mut values = vec![0.0; nnz];
    for (i, j, v) in triplets {
        let k = pattern.slot(i, j).expect("entry is in the pattern it built");
        values[k] = v;
    }
    CholeskyFactor::from_values(pattern, values)
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let mut it = header.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(d)), Some(Ok(nnz)), None) => Ok((d, nnz)),
        _ => Err(Error::Format(format!("bad triplet header `{header}`"))),
    }
}
