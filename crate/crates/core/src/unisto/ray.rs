use crate::birkhoff::{ray_point, BirkhoffError, Ray};
use crate::hadamard::{is_robust, robust_for_order, HadamardError, DEFAULT_TOL};
use crate::matrix::{c64, BistoMatrix, CMatrix, PermMatrix, Tolerances};

use super::{Method, UnistoError, UnistoVerdict};

/// `√a·D + √b·(H - D)` with `D` the diagonal of the robust matrix `H`; its
/// squared moduli are `a` on the diagonal and `b` elsewhere.
pub fn ray_unitary(hr: &CMatrix, alpha: f64) -> Result<CMatrix, UnistoError> {
    let n = hr.order();
    if !is_robust(hr, DEFAULT_TOL) {
        return Err(HadamardError::InputNotRobust.into());
    }
    let ray = Ray::new(PermMatrix::identity(n), alpha);
    let lo = Ray::min_alpha(n);
    if n < 2 || !(alpha >= lo && alpha <= 1.0) {
        return Err(BirkhoffError::AlphaOutOfRange { alpha, lo, n }.into());
    }
    let (sa, sb) = (ray.support_weight().max(0.0).sqrt(), ray.off_weight().max(0.0).sqrt());
    Ok(CMatrix::from_fn(n, |i, j| hr[(i, j)] * c64(if i == j { sa } else { sb }, 0.0)))
}

/// Finds `(P, α)` with `b = αP + (1-α)W` within `tol.bis`.
pub fn detect_ray(b: &BistoMatrix, tol: &Tolerances) -> Result<Ray, UnistoError> {
    let n = b.order();
    if n < 2 {
        return Err(BirkhoffError::OrderTooSmall(n).into());
    }
    let e = b.entries();
    let (lo, hi) = e.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    if hi - lo <= tol.bis {
        return Ok(Ray::new(PermMatrix::identity(n), 0.0));
    }
    let mut best: Option<(f64, Ray)> = None;
    // positive alpha marks the permutation by row maxima, negative by minima
    for pick_max in [true, false] {
        let image: Vec<usize> = (0..n)
            .map(|i| {
                let row = b.row(i);
                let mut k = 0;
                for j in 1..n {
                    if (pick_max && row[j] > row[k]) || (!pick_max && row[j] < row[k]) {
                        k = j;
                    }
                }
                k
            })
            .collect();
        let Ok(p) = PermMatrix::new(image) else { continue };
        let a = (0..n).map(|i| b.get(i, p.apply(i))).sum::<f64>() / n as f64;
        let alpha = ((n as f64 * a - 1.0) / (n as f64 - 1.0)).clamp(Ray::min_alpha(n), 1.0);
        let ray = Ray::new(p, alpha);
        let residual = ray_point(&ray)?.max_abs_diff(b);
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, ray));
        }
    }
    match best {
        Some((residual, ray)) if residual <= tol.bis => Ok(ray),
        Some((residual, _)) => Err(UnistoError::NotOnRay { residual }),
        None => Err(UnistoError::NotOnRay { residual: f64::INFINITY }),
    }
}

/// Certificate `U[i][j] = V[σ(i)][j]` from the ray unitary `V` of the
/// identity ray, where `σ` is the detected permutation. Real whenever the
/// robust matrix of this order is real (`n = 2` and `n ≡ 0 mod 4`).
pub fn ray_certificate(b: &BistoMatrix, tol: &Tolerances) -> Result<UnistoVerdict, UnistoError> {
    let n = b.order();
    let ray = detect_ray(b, tol)?;
    let hr = robust_for_order(n)?;
    let v = ray_unitary(&hr, ray.alpha)?;
    let u = CMatrix::from_fn(n, |i, j| v[(ray.perm.apply(i), j)]);
    Ok(UnistoVerdict::certified(b, u, Method::RayCertificate))
}
