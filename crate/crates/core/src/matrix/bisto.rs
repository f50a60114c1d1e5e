use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CMatrix, MatrixError};

/// Numerical slack used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bistochastic validation: negative entries and row/column sum residuals.
    pub bis: f64,
    /// Unitarity residual `max |UU* - I|`.
    pub unit: f64,
    /// Bisection width for phase roots.
    pub root: f64,
    /// Acceptance for `|D11|^2 - B33` and for certificate moduli.
    pub matching: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { bis: 1e-9, unit: 1e-9, root: 1e-12, matching: 1e-8 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), MatrixError> {
        for (name, v) in [("bis", self.bis), ("unit", self.unit), ("root", self.root), ("matching", self.matching)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MatrixError::InvalidTolerance { name, value: v });
            }
        }
        Ok(())
    }
}

/// A validated bistochastic matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BistoMatrix {
    n: usize,
    entries: Vec<f64>,
    tol: f64,
}

/// Checks non-negativity and unit row/column sums, reporting the worst
/// offender of the first violated condition.
pub fn validate_bistochastic(n: usize, entries: Vec<f64>, tol: &Tolerances) -> Result<BistoMatrix, MatrixError> {
    if n == 0 {
        return Err(MatrixError::Empty);
    }
    if entries.len() != n * n {
        return Err(MatrixError::NotSquare { rows: n, cols: entries.len() / n });
    }
    let slack = tol.bis;
    if let Some((idx, &value)) = entries
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Less))
    {
        if !value.is_finite() || value < -slack {
            return Err(MatrixError::NegativeEntry { row: idx / n, col: idx % n, value });
        }
    }
    let worst = |sums: Vec<f64>| {
        sums.into_iter()
            .map(|s| (s - 1.0).abs())
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc })
    };
    let (row, residual) = worst((0..n).map(|i| entries[i * n..(i + 1) * n].iter().sum()).collect());
    if residual > slack {
        return Err(MatrixError::RowSumViolation { row, residual });
    }
    let (col, residual) = worst((0..n).map(|j| (0..n).map(|i| entries[i * n + j]).sum()).collect());
    if residual > slack {
        return Err(MatrixError::ColSumViolation { col, residual });
    }
    Ok(BistoMatrix { n, entries, tol: slack })
}

impl BistoMatrix {
    pub fn new(n: usize, entries: Vec<f64>, tol: &Tolerances) -> Result<Self, MatrixError> {
        validate_bistochastic(n, entries, tol)
    }

    pub fn from_rows(rows: &[Vec<f64>], tol: &Tolerances) -> Result<Self, MatrixError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MatrixError::NotSquare { rows: n, cols: rows.iter().map(Vec::len).max().unwrap_or(0) });
        }
        validate_bistochastic(n, rows.concat(), tol)
    }

    /// Wraps entries that are bistochastic by construction.
    pub(crate) fn from_parts(n: usize, entries: Vec<f64>, tol: f64) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        Self { n, entries, tol }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Validation slack this matrix was accepted with.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        Self::from_parts(n, (0..n * n).map(|k| self.entries[(k % n) * n + k / n]).collect(), self.tol)
    }

    /// `B'[i][j] = B[rows[i]][cols[j]]`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Self {
        let n = self.n;
        let mut e = Vec::with_capacity(n * n);
        for &r in rows {
            for &c in cols {
                e.push(self.get(r, c));
            }
        }
        Self::from_parts(n, e, self.tol)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Entrywise square root, clamping tiny negatives from validation slack.
    pub fn sqrt_entries(&self) -> Vec<f64> {
        self.entries.iter().map(|&x| x.max(0.0).sqrt()).collect()
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_vec(self.n, self.entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .expect("shape checked at construction")
    }

    /// Largest `|B_ij - |U_ij|^2|`.
    pub fn moduli_mismatch(&self, u: &CMatrix) -> Result<f64, MatrixError> {
        if u.order() != self.n {
            return Err(MatrixError::OrderMismatch { left: self.n, right: u.order() });
        }
        Ok(self.entries.iter().zip(u.moduli_squared()).map(|(b, m)| (b - m).abs()).fold(0.0, f64::max))
    }
}
