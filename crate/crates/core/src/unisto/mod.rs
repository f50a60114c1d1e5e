//! Unistochasticity: necessary chain conditions, exact decisions for orders
//! up to 4, and explicit certificate unitaries for rays and triangles.
//!
//! A certificate is a unitary `U` with `B_ij = |U_ij|²`; every certificate
//! returned here has been checked against the input.

mod chain;
mod closure;
mod haagerup;
mod ray;
mod small;
mod triangle;

use serde::Serialize;
use thiserror::Error;

use crate::birkhoff::{BirkhoffError, PointClass, PointLabel};
use crate::hadamard::HadamardError;
use crate::matrix::{BistoMatrix, CMatrix, Tolerances};

pub use chain::{chain_conditions, chain_conditions_with, ChainReport, PairKind, PairMargin};
pub use haagerup::{haagerup4, DEFAULT_PHI_GRID};
pub use ray::{detect_ray, ray_certificate, ray_unitary};
pub use small::{decide_n2, decide_n3};
pub use triangle::{align_robust, detect_triangle, triangle_certificate, AlignedRobust};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnistoError {
    #[error("expected order {expected}, got {actual}")]
    WrongOrder { expected: usize, actual: usize },
    #[error("matrix is not on any ray (residual {residual:e})")]
    NotOnRay { residual: f64 },
    #[error("matrix is not in the triangle (residual {residual:e})")]
    NotInTriangle { residual: f64 },
    #[error("no robust Hadamard block alignment for this pairing")]
    AlignmentFailed,
    #[error(transparent)]
    Hadamard(#[from] HadamardError),
    #[error(transparent)]
    Birkhoff(#[from] BirkhoffError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Unistochastic,
    NotUnistochastic,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Exact2,
    Exact3,
    Haagerup4,
    RayCertificate,
    TriangleCertificate,
    ChainViolation,
    /// No applicable decision procedure.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnistoVerdict {
    pub status: Status,
    pub certificate: Option<CMatrix>,
    pub method: Method,
    /// Certificate error when one is present; otherwise the amount by which
    /// the deciding test failed.
    pub residual: f64,
}

impl UnistoVerdict {
    pub(crate) fn certified(b: &BistoMatrix, u: CMatrix, method: Method) -> Self {
        let residual = certificate_error(b, &u);
        Self { status: Status::Unistochastic, certificate: Some(u), method, residual }
    }

    pub(crate) fn rejected(method: Method, residual: f64) -> Self {
        Self { status: Status::NotUnistochastic, certificate: None, method, residual }
    }

    pub(crate) fn undecided(method: Method, residual: f64) -> Self {
        Self { status: Status::Undecided, certificate: None, method, residual }
    }

    pub fn is_unistochastic(&self) -> bool {
        self.status == Status::Unistochastic
    }
}

/// `max(‖UU* - I‖_max, max |B - |U|²|)`.
pub fn certificate_error(b: &BistoMatrix, u: &CMatrix) -> f64 {
    let moduli = b.moduli_mismatch(u).unwrap_or(f64::INFINITY);
    u.unitarity_residual().max(moduli)
}

/// Unitarity within `tol.unit` and moduli within `tol.matching`.
pub fn verify_certificate(b: &BistoMatrix, u: &CMatrix, tol: &Tolerances) -> bool {
    b.order() == u.order() && u.unitarity_residual() <= tol.unit && b.moduli_mismatch(u).is_ok_and(|m| m <= tol.matching)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: Tolerances,
    pub phi_grid: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: Tolerances::default(), phi_grid: DEFAULT_PHI_GRID }
    }
}

fn special_certificate(b: &BistoMatrix, tol: &Tolerances) -> Option<UnistoVerdict> {
    let n = b.order();
    if n % 2 == 1 {
        return None;
    }
    if let Ok(v) = ray_certificate(b, tol) {
        return Some(v);
    }
    let (p, q) = detect_triangle(b, tol)?;
    let aligned = align_robust(n)?;
    triangle_certificate(&p, &q, b, &aligned, tol).ok()
}

/// Routes by order: closed forms for 2 and 3, the phase sweep for 4.
/// Above 4 only chain violations and ray/triangle certificates decide;
/// everything else is `Undecided`.
pub fn decide(b: &BistoMatrix, config: &SolverConfig) -> UnistoVerdict {
    let tol = &config.tol;
    match b.order() {
        1 => UnistoVerdict::certified(b, CMatrix::identity(1), Method::Exact2),
        2 => decide_n2(b).expect("order checked"),
        3 => decide_n3(b, tol).expect("order checked"),
        4 => {
            let v = haagerup4(b, tol, config.phi_grid).expect("order checked");
            if v.is_unistochastic() || v.method == Method::ChainViolation {
                return v;
            }
            special_certificate(b, tol).unwrap_or(v)
        }
        _ => {
            let report = chain_conditions_with(b, tol.bis);
            if !report.pass {
                return UnistoVerdict::rejected(Method::ChainViolation, -report.margin());
            }
            special_certificate(b, tol).unwrap_or_else(|| UnistoVerdict::undecided(Method::Unresolved, 0.0))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    /// Chain conditions only; passing points stay `Undecided`.
    ChainOnly,
    /// Chain conditions, then [`decide`].
    Full,
}

/// Label for a cross-section point.
pub fn classify_point(b: &BistoMatrix, mode: ScanMode, config: &SolverConfig) -> PointClass {
    let report = chain_conditions_with(b, config.tol.bis);
    let chain_margin = Some(report.margin());
    if !report.pass {
        return PointClass { label: PointLabel::Outside, chain_margin, solver_residual: None };
    }
    if mode == ScanMode::ChainOnly {
        return PointClass { label: PointLabel::Undecided, chain_margin, solver_residual: None };
    }
    let v = decide(b, config);
    let label = match v.status {
        Status::Unistochastic => PointLabel::Unisto,
        Status::NotUnistochastic => PointLabel::ChainOnly,
        Status::Undecided => PointLabel::Undecided,
    };
    PointClass { label, chain_margin, solver_residual: Some(v.residual) }
}
