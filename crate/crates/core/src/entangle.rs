//! Orthonormal bases of the `n×n` bipartite space in which every vector has
//! the same Schmidt coefficients.
//!
//! Composite index convention: local basis states `|j⟩ ⊗ |l⟩` sit at index
//! `j·n + l`, row-major. Entropies use the natural logarithm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::birkhoff::{BirkhoffError, Ray};
use crate::hadamard::{robust_for_order, HadamardError};
use crate::matrix::{c64, eig_selfadjoint, CMatrix, Complex64, MatrixError, PermMatrix, Tolerances};
use crate::unisto::{ray_unitary, UnistoError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntangleError {
    #[error("input is not unitary (residual {residual:e})")]
    InputNotUnitary { residual: f64 },
    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("a = {a} lies outside [{lo}, 1]")]
    AOutOfRange { a: f64, lo: f64 },
    #[error("expected a vector of length {expected}, got {actual}")]
    WrongLength { expected: usize, actual: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Hadamard(#[from] HadamardError),
    #[error(transparent)]
    Birkhoff(#[from] BirkhoffError),
    #[error(transparent)]
    Unisto(#[from] UnistoError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisVector {
    pub m: usize,
    pub k: usize,
    pub amplitudes: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteBasis {
    pub n: usize,
    /// Ordered by `m·n + k`.
    pub vectors: Vec<BasisVector>,
    pub source_alpha: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtProfile {
    /// Squared Schmidt coefficients, descending.
    pub lambda: Vec<f64>,
    pub entropy: f64,
}

/// Composite index of `|j⟩ ⊗ |l⟩`.
#[inline]
pub fn composite_index(n: usize, j: usize, l: usize) -> usize {
    j * n + l
}

/// Vector `(m, k)` is `Σ_j U[m][j] |j⟩ ⊗ |j + k mod n⟩`.
pub fn build_basis(u: &CMatrix, tol: &Tolerances) -> Result<BipartiteBasis, EntangleError> {
    let residual = u.unitarity_residual();
    if residual > tol.unit {
        return Err(EntangleError::InputNotUnitary { residual });
    }
    let n = u.order();
    let vectors = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (m, k) = (idx / n, idx % n);
            let mut amplitudes = vec![Complex64::new(0.0, 0.0); n * n];
            for j in 0..n {
                amplitudes[composite_index(n, j, (j + k) % n)] = u[(m, j)];
            }
            BasisVector { m, k, amplitudes }
        })
        .collect();
    Ok(BipartiteBasis { n, vectors, source_alpha: None })
}

/// Basis from the ray unitary of the robust matrix of order `n` at `alpha`.
pub fn ray_basis(n: usize, alpha: f64, tol: &Tolerances) -> Result<BipartiteBasis, EntangleError> {
    let hr = robust_for_order(n)?;
    let u = ray_unitary(&hr, alpha)?;
    let mut basis = build_basis(&u, tol)?;
    basis.source_alpha = Some(alpha);
    Ok(basis)
}

impl BipartiteBasis {
    /// `max |⟨ψ_a|ψ_b⟩ - δ_ab|`.
    pub fn gram_residual(&self) -> f64 {
        let d = self.n * self.n;
        let rows: Vec<Complex64> = self.vectors.iter().flat_map(|v| v.amplitudes.iter().copied()).collect();
        CMatrix::from_vec(d, rows).expect("n² vectors of length n²").unitarity_residual()
    }

    /// Largest entry-wise spread of the sorted Schmidt vectors over the basis.
    pub fn schmidt_spread(&self) -> Result<f64, EntangleError> {
        let profiles: Vec<SchmidtProfile> =
            self.vectors.par_iter().map(|v| schmidt_profile(&v.amplitudes, self.n)).collect::<Result<_, _>>()?;
        let first = &profiles[0].lambda;
        Ok(profiles
            .iter()
            .flat_map(|p| p.lambda.iter().zip(first).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max))
    }

    /// Weight on the diagonal of the source ray, `((n-1)α + 1)/n`.
    pub fn support_weight(&self) -> Option<f64> {
        self.source_alpha.map(|alpha| Ray::new(PermMatrix::identity(self.n), alpha).support_weight())
    }

    /// Counter-ray bases (`a < 1/n`) exist but lie outside the interpolation
    /// between product and maximally entangled bases.
    pub fn outside_interpolation_range(&self) -> bool {
        self.source_alpha.is_some_and(|alpha| alpha < 0.0)
    }
}

/// `−Σ λ ln λ` with `0·ln 0 = 0`.
pub fn entropy(lambda: &[f64]) -> f64 {
    -lambda.iter().filter(|&&x| x > 1e-300).map(|&x| x * x.ln()).sum::<f64>()
}

/// Squared singular values of the `n×n` reshaping `M[j][l] = v[j·n + l]`.
pub fn schmidt_profile(v: &[Complex64], n: usize) -> Result<SchmidtProfile, EntangleError> {
    if v.len() != n * n {
        return Err(EntangleError::WrongLength { expected: n * n, actual: v.len() });
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(EntangleError::NotNormalized { norm });
    }
    let m = CMatrix::from_vec(n, v.to_vec())?;
    let mm = m.matmul(&m.conj_transpose())?;
    let mut lambda: Vec<f64> = eig_selfadjoint(&mm, 1e-9)?.into_iter().map(|x| x.max(0.0)).collect();
    lambda.reverse();
    let entropy = entropy(&lambda);
    Ok(SchmidtProfile { lambda, entropy })
}

/// Entropy of `(a, b, …, b)` with `b = (1-a)/(n-1)`.
pub fn ray_entropy(n: usize, a: f64) -> f64 {
    let b = (1.0 - a) / (n as f64 - 1.0);
    let xlnx = |x: f64| if x > 1e-300 { x * x.ln() } else { 0.0 };
    -xlnx(a) - (n as f64 - 1.0) * xlnx(b)
}

/// `(a, S(a))` for each `a ∈ [1/n, 1]`.
pub fn entropy_curve(n: usize, a_values: &[f64]) -> Result<Vec<(f64, f64)>, EntangleError> {
    let lo = 1.0 / n as f64;
    a_values
        .iter()
        .map(|&a| {
            if !(a >= lo - 1e-15 && a <= 1.0) {
                return Err(EntangleError::AOutOfRange { a, lo });
            }
            Ok((a, ray_entropy(n, a)))
        })
        .collect()
}

/// Ray parameter with support weight `a`.
pub fn alpha_for_weight(n: usize, a: f64) -> f64 {
    (n as f64 * a - 1.0) / (n as f64 - 1.0)
}

/// Convenience for the CLI: complex amplitudes as `[re, im]` pairs.
pub fn amplitude_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Product state `|j⟩ ⊗ |l⟩`.
pub fn product_state(n: usize, j: usize, l: usize) -> Vec<Complex64> {
    let mut v = vec![c64(0.0, 0.0); n * n];
    v[composite_index(n, j, l)] = c64(1.0, 0.0);
    v
}
