use super::{CMatrix, MatrixError};

/// Eigenvalues of a self-adjoint matrix, ascending.
///
/// The Hermitian matrix `A = X + iY` is embedded as the real symmetric
/// `[[X, -Y], [Y, X]]`, which carries every eigenvalue of `A` twice, and
/// diagonalized by cyclic Jacobi rotations.
pub fn eig_selfadjoint(a: &CMatrix, tol: f64) -> Result<Vec<f64>, MatrixError> {
    let residual = a.self_adjoint_residual();
    if residual > tol {
        return Err(MatrixError::NotSelfAdjoint { residual });
    }
    let n = a.order();
    let m = 2 * n;
    let mut s = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            // symmetrize to remove the tolerated asymmetry
            let z = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            s[i * m + j] = z.re;
            s[(i + n) * m + (j + n)] = z.re;
            s[i * m + (j + n)] = -z.im;
            s[(i + n) * m + j] = z.im;
        }
    }
    let mut doubled = jacobi_eigenvalues(&mut s, m);
    doubled.sort_by(|x, y| x.total_cmp(y));
    Ok(doubled.into_iter().step_by(2).collect())
}

fn jacobi_eigenvalues(s: &mut [f64], m: usize) -> Vec<f64> {
    let scale: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|p| (0..m).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| s[p * m + q] * s[p * m + q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = s[p * m + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = s[p * m + p];
                let aqq = s[q * m + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let akp = s[k * m + p];
                    let akq = s[k * m + q];
                    s[k * m + p] = c * akp - sn * akq;
                    s[k * m + q] = sn * akp + c * akq;
                }
                for k in 0..m {
                    let apk = s[p * m + k];
                    let aqk = s[q * m + k];
                    s[p * m + k] = c * apk - sn * aqk;
                    s[q * m + k] = sn * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| s[i * m + i]).collect()
}
