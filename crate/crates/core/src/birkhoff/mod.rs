//! Geometry of the set of bistochastic matrices: the flat matrix, rays through
//! it, edges between permutation matrices, complementary permutation pairs
//! and the triangles they span, and planar cross-sections.

mod scan;

use thiserror::Error;

use crate::matrix::{BistoMatrix, MatrixError, PermMatrix};

pub use scan::{cross_section, emit_figure_data, LabelCounts, PointClass, PointLabel, ScanConfig, ScanGrid, ScanPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BirkhoffError {
    #[error("alpha {alpha} outside [{lo}, 1] for order {n}")]
    AlphaOutOfRange { alpha: f64, lo: f64, n: usize },
    #[error("permutations are not strongly complementary")]
    NotStronglyComplementary,
    #[error("weights ({wa}, {wq}) are not in the simplex")]
    WeightsOutOfSimplex { wa: f64, wq: f64 },
    #[error("plane anchors are affinely dependent with the flat matrix")]
    DegeneratePlane,
    #[error("order {0} too small")]
    OrderTooSmall(usize),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// All entries `1/n`.
pub fn flat_matrix(n: usize) -> BistoMatrix {
    BistoMatrix::from_parts(n, vec![1.0 / n as f64; n * n], 0.0)
}

/// Point `αP + (1-α)W` on the segment from a permutation matrix through the
/// flat matrix; negative `α` lies beyond the flat matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    pub perm: PermMatrix,
    pub alpha: f64,
}

impl Ray {
    pub fn new(perm: PermMatrix, alpha: f64) -> Self {
        Self { perm, alpha }
    }

    /// Smallest admissible `α`, `-1/(n-1)`, where off-support entries vanish.
    pub fn min_alpha(n: usize) -> f64 {
        -1.0 / (n as f64 - 1.0)
    }

    /// Weight `a = ((n-1)α + 1)/n` on the permutation's support.
    pub fn support_weight(&self) -> f64 {
        let n = self.perm.order() as f64;
        ((n - 1.0) * self.alpha + 1.0) / n
    }

    /// Weight `b = (1-a)/(n-1)` off the support.
    pub fn off_weight(&self) -> f64 {
        let n = self.perm.order() as f64;
        (1.0 - self.support_weight()) / (n - 1.0)
    }
}

pub fn ray_point(r: &Ray) -> Result<BistoMatrix, BirkhoffError> {
    let n = r.perm.order();
    if n < 2 {
        return Err(BirkhoffError::OrderTooSmall(n));
    }
    let lo = Ray::min_alpha(n);
    if !(r.alpha >= lo && r.alpha <= 1.0) {
        return Err(BirkhoffError::AlphaOutOfRange { alpha: r.alpha, lo, n });
    }
    let (a, b) = (r.support_weight().max(0.0), r.off_weight().max(0.0));
    let mut e = vec![b; n * n];
    for i in 0..n {
        e[i * n + r.perm.apply(i)] = a;
    }
    Ok(BistoMatrix::from_parts(n, e, 0.0))
}

/// Edge types between two vertices, by the relative permutation `R = PᵀQ`.
///
/// For order 4 the classes are exact: short edges (`Tr R = 2`) and long
/// involutive edges are unistochastic, middle edges (`Tr R = 1`) and long
/// edges with `R² ≠ I` are not. For other orders the same trace/involution
/// rule is applied with short meaning `Tr R = n-2`, and the names carry no
/// unistochasticity claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    /// `P = Q`, not an edge.
    Degenerate,
    ShortUnisto,
    MiddleNotUnisto,
    LongNotUnisto,
    LongUnisto,
}

pub fn relative_perm(p: &PermMatrix, q: &PermMatrix) -> Result<PermMatrix, BirkhoffError> {
    Ok(p.transpose().compose(q)?)
}

pub fn classify_edge(p: &PermMatrix, q: &PermMatrix) -> Result<EdgeClass, BirkhoffError> {
    let r = relative_perm(p, q)?;
    let n = r.order();
    let t = r.trace();
    Ok(if t == n {
        EdgeClass::Degenerate
    } else if t + 2 == n {
        EdgeClass::ShortUnisto
    } else if t == 0 && r.is_involution() {
        EdgeClass::LongUnisto
    } else if t == 0 {
        EdgeClass::LongNotUnisto
    } else {
        EdgeClass::MiddleNotUnisto
    })
}

/// Hilbert-Schmidt length `sqrt(2(n - Tr PᵀQ))` of the segment `PQ`.
pub fn edge_length(p: &PermMatrix, q: &PermMatrix) -> Result<f64, BirkhoffError> {
    let r = relative_perm(p, q)?;
    Ok((2.0 * (r.order() - r.trace()) as f64).sqrt())
}

/// `P_ij = P_hk = Q_ik = 1` implies `Q_hj = 1`.
pub fn is_complementary(p: &PermMatrix, q: &PermMatrix) -> bool {
    let n = p.order();
    if q.order() != n {
        return false;
    }
    (0..n).all(|i| {
        let j = p.apply(i);
        (0..n).all(|h| {
            let k = p.apply(h);
            q.apply(i) != k || q.apply(h) == j
        })
    })
}

/// Complementary with disjoint supports.
pub fn is_strongly_complementary(p: &PermMatrix, q: &PermMatrix) -> bool {
    is_complementary(p, q) && (0..p.order()).all(|i| p.apply(i) != q.apply(i))
}

/// `wa·P + wq·Q + (1 - wa - wq)·W`.
pub fn triangle_point(p: &PermMatrix, q: &PermMatrix, wa: f64, wq: f64) -> Result<BistoMatrix, BirkhoffError> {
    if !is_strongly_complementary(p, q) {
        return Err(BirkhoffError::NotStronglyComplementary);
    }
    if !(wa >= 0.0 && wq >= 0.0 && wa + wq <= 1.0 + 1e-15) {
        return Err(BirkhoffError::WeightsOutOfSimplex { wa, wq });
    }
    let n = p.order();
    let c = (1.0 - wa - wq).max(0.0) / n as f64;
    let mut e = vec![c; n * n];
    for i in 0..n {
        e[i * n + p.apply(i)] += wa;
        e[i * n + q.apply(i)] += wq;
    }
    Ok(BistoMatrix::from_parts(n, e, 0.0))
}

/// Every pair strongly complementary and at most `n` members.
pub fn mutually_strong_set(perms: &[PermMatrix]) -> bool {
    let Some(first) = perms.first() else { return true };
    let n = first.order();
    perms.len() <= n
        && perms.iter().all(|p| p.order() == n)
        && perms
            .iter()
            .enumerate()
            .all(|(i, p)| perms[i + 1..].iter().all(|q| is_strongly_complementary(p, q)))
}
