use std::sync::Arc;

use super::{count_touches, SparsityPattern};
use crate::error::{Error, Result};

/// Diagonal entries with magnitude below this are treated as singular.
pub const MIN_DIAGONAL: f64 = 1e-30;

/// Sparse lower-triangular factor with values stored only at pattern positions.
///
/// Used both for the precision Cholesky factor `T` (so that `Omega = T T'`)
/// and for the covariance Cholesky factor `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct CholeskyFactor {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl CholeskyFactor {
    /// Identity factor on the given pattern.
    pub fn identity(pattern: Arc<SparsityPattern>) -> Self {
        let mut values = vec![0.0; pattern.nnz()];
        for j in 0..pattern.dim() {
            values[pattern.diag_slot(j)] = 1.0;
        }
        Self { pattern, values }
    }

    /// Wraps values aligned with the pattern's storage order. Every diagonal
    /// value must be finite and strictly positive.
    pub fn from_values(pattern: Arc<SparsityPattern>, values: Vec<f64>) -> Result<Self> {
        if values.len() != pattern.nnz() {
            return Err(Error::DimensionMismatch {
                context: "factor values",
                expected: pattern.nnz(),
                got: values.len(),
            });
        }
        for j in 0..pattern.dim() {
            let v = values[pattern.diag_slot(j)];
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::SingularFactor { index: j, value: v });
            }
        }
        Ok(Self { pattern, values })
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn shared_pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access for in-place updates. The pattern itself cannot change.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn diag(&self, j: usize) -> f64 {
        self.values[self.pattern.diag_slot(j)]
    }

    /// Value at `(row, col)`; zero outside the pattern.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pattern.slot(row, col).map_or(0.0, |k| self.values[k])
    }

    /// `sum_i log T_ii`, the log-determinant of the factor.
    pub fn log_det(&self) -> f64 {
        (0..self.dim()).map(|j| self.diag(j).ln()).sum()
    }

    fn check_diagonal(&self) -> Result<()> {
        for j in 0..self.dim() {
            let v = self.diag(j);
            if !v.is_finite() || v.abs() < MIN_DIAGONAL {
                return Err(Error::SingularFactor { index: j, value: v });
            }
        }
        Ok(())
    }

    fn check_len(&self, context: &'static str, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { context, expected: self.dim(), got: len });
        }
        Ok(())
    }

    /// Solves `T' x = s` by back substitution, streaming columns of `T`.
    pub fn solve_transposed(&self, s: &[f64]) -> Result<Vec<f64>> {
        let mut x = s.to_vec();
        self.solve_transposed_in_place(&mut x)?;
        Ok(x)
    }

    /// In-place variant of [`solve_transposed`](Self::solve_transposed).
    pub fn solve_transposed_in_place(&self, x: &mut [f64]) -> Result<()> {
        self.check_len("solve_transposed", x.len())?;
        self.check_diagonal()?;
        let (col_ptr, row_idx) = (self.pattern.col_ptr(), self.pattern.row_idx());
        for j in (0..self.dim()).rev() {
            let start = col_ptr[j];
            let mut acc = x[j];
            for k in start + 1..col_ptr[j + 1] {
                acc -= self.values[k] * x[row_idx[k]];
            }
            x[j] = acc / self.values[start];
        }
        count_touches(self.values.len());
        Ok(())
    }

    /// Solves `T x = g` by forward substitution.
    pub fn solve_direct(&self, g: &[f64]) -> Result<Vec<f64>> {
        let mut x = g.to_vec();
        self.solve_direct_in_place(&mut x)?;
        Ok(x)
    }

    /// In-place variant of [`solve_direct`](Self::solve_direct).
    pub fn solve_direct_in_place(&self, x: &mut [f64]) -> Result<()> {
        self.check_len("solve_direct", x.len())?;
        self.check_diagonal()?;
        let (col_ptr, row_idx) = (self.pattern.col_ptr(), self.pattern.row_idx());
        for j in 0..self.dim() {
            let start = col_ptr[j];
            let xj = x[j] / self.values[start];
            x[j] = xj;
            if xj != 0.0 {
                for k in start + 1..col_ptr[j + 1] {
                    x[row_idx[k]] -= self.values[k] * xj;
                }
            }
        }
        count_touches(self.values.len());
        Ok(())
    }

    /// `y = T s`.
    pub fn multiply(&self, s: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim()];
        self.multiply_into(s, &mut y)?;
        Ok(y)
    }

    /// Writes `T s` into `y`.
    pub fn multiply_into(&self, s: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_len("multiply", s.len())?;
        self.check_len("multiply output", y.len())?;
        y.fill(0.0);
        let (col_ptr, row_idx) = (self.pattern.col_ptr(), self.pattern.row_idx());
        for (j, &sj) in s.iter().enumerate() {
            for k in col_ptr[j]..col_ptr[j + 1] {
                y[row_idx[k]] += self.values[k] * sj;
            }
        }
        count_touches(self.values.len());
        Ok(())
    }

    /// `y = T' s`.
    pub fn multiply_transposed(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check_len("multiply_transposed", s.len())?;
        let (col_ptr, row_idx) = (self.pattern.col_ptr(), self.pattern.row_idx());
        let y = (0..self.dim())
            .map(|j| {
                (col_ptr[j]..col_ptr[j + 1])
                    .map(|k| self.values[k] * s[row_idx[k]])
                    .sum()
            })
            .collect();
        count_touches(self.values.len());
        Ok(y)
    }

    /// Diagonal of `T^{-T} T^{-1}`, i.e. the marginal variances when `T` is a
    /// precision factor. Component `i` is `|T^{-1} e_i|^2`.
    pub fn marginal_variances(&self) -> Result<Vec<f64>> {
        self.check_diagonal()?;
        let d = self.dim();
        let (col_ptr, row_idx) = (self.pattern.col_ptr(), self.pattern.row_idx());
        let mut x = vec![0.0; d];
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            // T^{-1} e_i vanishes above row i, so the forward pass starts at column i.
            x[i..].fill(0.0);
            x[i] = 1.0;
            let mut norm2 = 0.0;
            for j in i..d {
                let start = col_ptr[j];
                let xj = x[j] / self.values[start];
                norm2 += xj * xj;
                if xj != 0.0 {
                    for k in start + 1..col_ptr[j + 1] {
                        x[row_idx[k]] -= self.values[k] * xj;
                    }
                }
            }
            out.push(norm2);
        }
        Ok(out)
    }

    /// Row-major dense copy, for diagnostics and small-dimension tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut m = vec![vec![0.0; d]; d];
        for ((i, j), v) in self.pattern.entries().zip(&self.values) {
            m[i][j] = *v;
        }
        m
    }
}
