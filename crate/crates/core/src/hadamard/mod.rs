//! Hadamard-type matrices: verification predicates, exact constructions
//! (Paley skew and conference matrices, doubling), robust matrices and
//! phase invariants.

mod construct;
mod field;
mod invariants;

use thiserror::Error;

use crate::matrix::{c64, CMatrix, Complex64};

pub use construct::{
    conference_paley, conference_paley_exact, double_skew, paley_skew, paley_skew_exact, robust_for_order,
    robust_from_conference, selfadjoint_conference_form, skew_normalize, skew_route, SignMatrix, SkewRoute,
};
pub use invariants::{fourier, fourier_invariants_exact, haagerup_invariants, InvariantSet, DEFAULT_PHASE_QUANTUM};

/// Tolerance used when a construction re-verifies its own output.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HadamardError {
    #[error("order {n} unsupported: {reason}")]
    UnsupportedOrder { n: usize, reason: String },
    #[error("input is not a skew Hadamard matrix")]
    InputNotSkew,
    #[error("input is not a symmetric conference matrix")]
    InputNotConference,
    #[error("input is not a real robust Hadamard matrix")]
    InputNotRobust,
    #[error("input is not a Hadamard matrix")]
    InputNotHadamard,
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryField {
    Real,
    Complex,
}

/// Classification of a Hadamard matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HadamardKind {
    pub field: EntryField,
    pub is_skew: bool,
    pub is_robust: bool,
    /// `H - iI` is a symmetric conference matrix.
    pub is_conference_derived: bool,
}

impl HadamardKind {
    /// `None` when `h` is not Hadamard.
    pub fn classify(h: &CMatrix, tol: f64) -> Option<Self> {
        if !is_hadamard(h, tol) {
            return None;
        }
        let field = if h.is_real(tol) { EntryField::Real } else { EntryField::Complex };
        let mut shifted = h.clone();
        for i in 0..h.order() {
            shifted[(i, i)] -= c64(0.0, 1.0);
        }
        Some(Self {
            field,
            is_skew: is_skew(h, tol),
            is_robust: is_robust(h, tol),
            is_conference_derived: is_conference(&shifted, tol),
        })
    }
}

/// Unimodular entries and `HH* = nI`.
pub fn is_hadamard(h: &CMatrix, tol: f64) -> bool {
    let n = h.order();
    n > 0 && h.entries().iter().all(|z| (z.norm() - 1.0).abs() <= tol) && h.gram_residual(n as f64) <= tol
}

/// Determinants `h_ii h_jj - h_ij h_ji` of the principal 2×2 minors, `i < j`.
pub fn principal_minor_dets(h: &CMatrix) -> Vec<Complex64> {
    let n = h.order();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(h[(i, i)] * h[(j, j)] - h[(i, j)] * h[(j, i)]);
        }
    }
    out
}

/// Hadamard with every principal 2×2 minor itself Hadamard (`|det| = 2`).
pub fn is_robust(h: &CMatrix, tol: f64) -> bool {
    is_hadamard(h, tol) && principal_minor_dets(h).iter().all(|d| (d.norm() - 2.0).abs() <= tol)
}

/// Real Hadamard with `H + Hᵀ = 2I`.
pub fn is_skew(h: &CMatrix, tol: f64) -> bool {
    let n = h.order();
    h.is_real(tol)
        && is_hadamard(h, tol)
        && (0..n).all(|i| {
            (0..n).all(|j| {
                let target = if i == j { 2.0 } else { 0.0 };
                (h[(i, j)] + h[(j, i)] - target).norm() <= tol
            })
        })
}

/// Zero diagonal, ±1 off the diagonal, symmetric and `CCᵀ = (n-1)I`.
pub fn is_conference(c: &CMatrix, tol: f64) -> bool {
    let n = c.order();
    if n < 2 {
        return false;
    }
    let entries_ok = (0..n).all(|i| {
        (0..n).all(|j| {
            let z = c[(i, j)];
            if i == j {
                z.norm() <= tol
            } else {
                z.im.abs() <= tol && (z.re.abs() - 1.0).abs() <= tol && (z - c[(j, i)]).norm() <= tol
            }
        })
    });
    entries_ok && c.gram_residual((n - 1) as f64) <= tol
}
