//! Structural nonzero positions of a lower-triangular factor.
//!
//! Entries are held in compressed sparse column form. Within a column the row
//! indices are strictly increasing, so the diagonal is always the first entry
//! of its column. Indices are 0-based in memory; the triplet text format uses
//! 1-based indices.

use crate::error::{Error, Result};

/// Positions of the structurally nonzero entries of a lower-triangular matrix.
///
/// Every diagonal position is present and every entry satisfies `col <= row`.
/// Two patterns describing the same structure compare equal regardless of the
/// order in which their entries were supplied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityPattern {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Builds a pattern from 0-based `(row, col)` pairs given in any order.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSize("pattern dimension must be positive".into()));
        }
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); dim];
        for (row, col) in entries {
            if row >= dim || col >= dim {
                return Err(Error::InvalidPattern(format!(
                    "entry ({row}, {col}) outside a {dim}x{dim} matrix"
                )));
            }
            if col > row {
                return Err(Error::InvalidPattern(format!(
                    "entry ({row}, {col}) lies above the diagonal"
                )));
            }
            cols[col].push(row);
        }
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for (j, mut rows) in cols.into_iter().enumerate() {
            rows.sort_unstable();
            if rows.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidPattern(format!("duplicate entry in column {j}")));
            }
            if rows.first() != Some(&j) {
                return Err(Error::InvalidPattern(format!("diagonal entry ({j}, {j}) missing")));
            }
            row_idx.extend(rows);
            col_ptr.push(row_idx.len());
        }
        Ok(Self { dim, col_ptr, row_idx })
    }

    /// Diagonal-only pattern (mean-field factor).
    pub fn diagonal(dim: usize) -> Result<Self> {
        Self::from_entries(dim, (0..dim).map(|i| (i, i)))
    }

    /// Full lower triangle (unrestricted factor).
    pub fn dense(dim: usize) -> Result<Self> {
        Self::from_entries(dim, (0..dim).flat_map(|j| (j..dim).map(move |i| (i, j))))
    }

    /// Block-arrow pattern for `n` subjects with `p` random effects each and
    /// `m` global parameters: dense lower-triangular `p x p` diagonal blocks,
    /// dense bottom rows for the globals and a dense lower-triangular corner.
    pub fn glmm(n: usize, p: usize, m: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidSize(format!(
                "block-arrow pattern needs n >= 1 and p >= 1 (got n={n}, p={p})"
            )));
        }
        let latent = n * p;
        let dim = latent + m;
        let mut entries = Vec::with_capacity(n * p * (p + 1) / 2 + m * latent + m * (m + 1) / 2);
        for block in 0..n {
            let start = block * p;
            for j in 0..p {
                for i in j..p {
                    entries.push((start + i, start + j));
                }
            }
        }
        push_global_rows(&mut entries, latent, m);
        Self::from_entries(dim, entries)
    }

    /// Band-arrow pattern for a state space model: `k` sub-diagonals on the
    /// first `n` rows and columns, dense rows for `m` global parameters and a
    /// dense lower-triangular corner.
    pub fn ssm(n: usize, k: usize, m: usize) -> Result<Self> {
        if n == 0 || k == 0 || k >= n {
            return Err(Error::InvalidSize(format!(
                "band-arrow pattern needs n >= 1 and 1 <= k < n (got n={n}, k={k})"
            )));
        }
        let dim = n + m;
        let mut entries = Vec::with_capacity(n * (k + 1) + m * n + m * (m + 1) / 2);
        for j in 0..n {
            for i in j..(j + k + 1).min(n) {
                entries.push((i, j));
            }
        }
        push_global_rows(&mut entries, n, m);
        Self::from_entries(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored entries, diagonal included.
    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    /// Storage slot of column `col`'s diagonal entry.
    #[inline]
    pub fn diag_slot(&self, col: usize) -> usize {
        self.col_ptr[col]
    }

    /// Storage slot of `(row, col)`, if that position is part of the pattern.
    pub fn slot(&self, row: usize, col: usize) -> Option<usize> {
        if col >= self.dim {
            return None;
        }
        let start = self.col_ptr[col];
        let rows = &self.row_idx[start..self.col_ptr[col + 1]];
        rows.binary_search(&row).ok().map(|k| start + k)
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.slot(row, col).is_some()
    }

    /// Iterates `(row, col)` pairs in storage (column-major) order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim).flat_map(move |j| {
            self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
                .iter()
                .map(move |&i| (i, j))
        })
    }

    /// Column index of every storage slot, aligned with `row_idx`.
    pub fn col_of_slots(&self) -> Vec<usize> {
        let mut cols = Vec::with_capacity(self.nnz());
        for j in 0..self.dim {
            cols.extend(std::iter::repeat_n(j, self.col_ptr[j + 1] - self.col_ptr[j]));
        }
        cols
    }

    /// Whether storage slot `k` holds a diagonal entry.
    pub fn is_diag_slot(&self, k: usize, col: usize) -> bool {
        self.row_idx[k] == col
    }
}

fn push_global_rows(entries: &mut Vec<(usize, usize)>, first_global: usize, m: usize) {
    for g in 0..m {
        let row = first_global + g;
        for col in 0..=row {
            entries.push((row, col));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_based(p: &SparsityPattern) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = p.entries().map(|(i, j)| (i + 1, j + 1)).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn smallest_block_arrow() {
        let p = SparsityPattern::glmm(2, 1, 1).unwrap();
        assert_eq!(one_based(&p), vec![(1, 1), (2, 2), (3, 1), (3, 2), (3, 3)]);
    }

    #[test]
    fn single_dense_block() {
        let p = SparsityPattern::glmm(1, 2, 0).unwrap();
        assert_eq!(one_based(&p), vec![(1, 1), (2, 1), (2, 2)]);
    }

    #[test]
    fn smallest_band_arrow() {
        let p = SparsityPattern::ssm(3, 1, 1).unwrap();
        assert_eq!(
            one_based(&p),
            vec![(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3), (4, 4)]
        );
        assert_eq!(SparsityPattern::ssm(2, 1, 0).unwrap(), SparsityPattern::dense(2).unwrap());
    }

    #[test]
    fn invalid_sizes_rejected() {
        assert!(SparsityPattern::glmm(0, 1, 1).is_err());
        assert!(SparsityPattern::glmm(3, 0, 1).is_err());
        assert!(SparsityPattern::ssm(3, 0, 1).is_err());
        assert!(SparsityPattern::ssm(3, 3, 1).is_err());
        assert!(SparsityPattern::ssm(1, 1, 1).is_err());
        assert!(SparsityPattern::diagonal(0).is_err());
    }

    #[test]
    fn canonical_order_is_insertion_independent() {
        let a = SparsityPattern::from_entries(3, [(0, 0), (1, 1), (2, 2), (2, 0)]).unwrap();
        let b = SparsityPattern::from_entries(3, [(2, 0), (2, 2), (0, 0), (1, 1)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entries().collect::<Vec<_>>(), vec![(0, 0), (2, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn malformed_entries_rejected() {
        assert!(SparsityPattern::from_entries(2, [(0, 0)]).is_err());
        assert!(SparsityPattern::from_entries(2, [(0, 0), (1, 1), (0, 1)]).is_err());
        assert!(SparsityPattern::from_entries(2, [(0, 0), (1, 1), (1, 1)]).is_err());
        assert!(SparsityPattern::from_entries(2, [(0, 0), (1, 1), (2, 0)]).is_err());
    }

    #[test]
    fn slot_lookup() {
        let p = SparsityPattern::ssm(3, 1, 1).unwrap();
        for (k, (i, j)) in p.entries().enumerate() {
            assert_eq!(p.slot(i, j), Some(k));
        }
        assert_eq!(p.slot(2, 0), None);
        assert_eq!(p.diag_slot(1), p.slot(1, 1).unwrap());
    }
}
