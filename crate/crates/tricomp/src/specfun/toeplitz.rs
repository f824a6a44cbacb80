//! Lower-triangular Toeplitz matrix exponential via its first column.
//!
//! An m x m lower-triangular Toeplitz matrix is determined by its first
//! column t = (t_0 .. t_{m-1}); so is any analytic function of it, because
//! such matrices form a commutative algebra isomorphic to truncated power
//! series. exp is computed in O(m^2) through the series recursion
//! q_n = sum_{i<n} ((n-i)/n) t_{n-i} q_i, q_0 = e^{t_0}.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzFirstColumn {
    pub entries: Vec<f64>,
}

impl ToeplitzFirstColumn {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("Toeplitz column must have m >= 1".into()));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::Domain("Toeplitz column entries must be finite".into()));
        }
        Ok(ToeplitzFirstColumn { entries })
    }

    pub fn m(&self) -> usize {
        self.entries.len()
    }
}

/// exp of the matrix, reduced off the diagonal: returns the column p with
/// exp(T) = e^{t_0} * LTT(p), p_0 = 1. t_0 never enters the recursion (only
/// differences t_{n-i} with n-i >= 1 do), so the split is exact and the
/// caller can keep the scalar factor in log space.
pub fn ltt_exp_reduced(col: &ToeplitzFirstColumn) -> Vec<f64> {
    let m = col.m();
    let t = &col.entries;
    let mut p = vec![0.0; m];
    p[0] = 1.0;
    for n in 1..m {
        let mut acc = 0.0;
        for i in 0..n {
            acc += (n - i) as f64 / n as f64 * t[n - i] * p[i];
        }
        p[n] = acc;
    }
    p
}

/// First column of exp of the lower-triangular Toeplitz matrix with first
/// column `col`. Overflow policy: when |t_0| > 500 the scalar factor is kept
/// in log space internally; a result that still overflows f64 is reported.
pub fn ltt_exp(col: &ToeplitzFirstColumn) -> Result<ToeplitzFirstColumn> {
    let t0 = col.entries[0];
    let p = ltt_exp_reduced(col);
    let entries: Vec<f64> = if t0.abs() > 500.0 {
        // scale each entry individually in log space so moderate p values
        // survive extreme t_0
        p.iter()
            .map(|&pi| {
                if pi == 0.0 {
                    0.0
                } else {
                    (t0 + pi.abs().ln()).exp() * pi.signum()
                }
            })
            .collect()
    } else {
        let s = t0.exp();
        p.iter().map(|&pi| s * pi).collect()
    };
    if entries.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numerical(format!(
            "Toeplitz exponential overflowed (t_0 = {t0})"
        )));
    }
    ToeplitzFirstColumn::new(entries)
}

/// Signed sum of the first-column entries. For the coverage parameterizations
/// this is the probability mass captured by the matrix exponential; the
/// signed sum (not an l1 norm) is what reproduces the power-series
/// coefficients of exp.
pub fn first_column_sum(col: &ToeplitzFirstColumn) -> f64 {
    col.entries.iter().sum()
}

/// First column of the product of two lower-triangular Toeplitz matrices
/// (a truncated convolution); the algebra is commutative.
pub fn toeplitz_mul(a: &ToeplitzFirstColumn, b: &ToeplitzFirstColumn) -> Result<ToeplitzFirstColumn> {
    if a.m() != b.m() {
        return Err(Error::Domain("Toeplitz product needs equal dimensions".into()));
    }
    let m = a.m();
    let mut out = vec![0.0; m];
    for n in 0..m {
        let mut acc = 0.0;
        for i in 0..=n {
            acc += a.entries[i] * b.entries[n - i];
        }
        out[n] = acc;
    }
    ToeplitzFirstColumn::new(out)
}
