//! Value types shared by every other module: dense complex matrices,
//! validated bistochastic matrices, permutation matrices and tolerances.
//!
//! All values are immutable once built; operations return new values.

mod bisto;
mod complex;
mod eigen;
mod perm;

use thiserror::Error;

pub use bisto::{validate_bistochastic, BistoMatrix, Tolerances};
pub use complex::CMatrix;
pub use eigen::eig_selfadjoint;
pub use num_complex::Complex64;
pub use perm::PermMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not square ({rows} rows, row of length {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("negative entry {value:e} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to 1 {residual:+e}")]
    RowSumViolation { row: usize, residual: f64 },
    #[error("column {col} sums to 1 {residual:+e}")]
    ColSumViolation { col: usize, residual: f64 },
    #[error("matrix is not self-adjoint (residual {residual:e})")]
    NotSelfAdjoint { residual: f64 },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("tolerance {name} must be positive and finite, got {value}")]
    InvalidTolerance { name: &'static str, value: f64 },
}

/// Shorthand for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
