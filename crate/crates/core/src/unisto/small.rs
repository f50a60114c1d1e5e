use crate::matrix::{c64, BistoMatrix, CMatrix, Complex64, Tolerances};

use super::chain::chain_conditions_with;
use super::closure::close_two;
use super::{Method, UnistoError, UnistoVerdict};

fn expect_order(b: &BistoMatrix, n: usize) -> Result<(), UnistoError> {
    if b.order() != n {
        return Err(UnistoError::WrongOrder { expected: n, actual: b.order() });
    }
    Ok(())
}

/// Every 2×2 bistochastic matrix is orthostochastic.
pub fn decide_n2(b: &BistoMatrix) -> Result<UnistoVerdict, UnistoError> {
    expect_order(b, 2)?;
    let a = b.get(0, 0).clamp(0.0, 1.0);
    let (c, s) = (a.sqrt(), (1.0 - a).sqrt());
    let u = CMatrix::from_real(2, &[c, s, -s, c]).expect("2x2");
    Ok(UnistoVerdict::certified(b, u, Method::Exact2))
}

/// Order 3: the chain conditions are sufficient. The certificate has a real
/// first row and column; the second column closes the triangle of links
/// with the first, and the third is the conjugated cross product.
pub fn decide_n3(b: &BistoMatrix, tol: &Tolerances) -> Result<UnistoVerdict, UnistoError> {
    expect_order(b, 3)?;
    let report = chain_conditions_with(b, tol.bis);
    if !report.pass {
        return Ok(UnistoVerdict::rejected(Method::ChainViolation, -report.margin()));
    }
    let s = b.sqrt_entries();
    let sq = |i: usize, j: usize| s[i * 3 + j];
    let links: Vec<f64> = (0..3).map(|i| sq(i, 0) * sq(i, 1)).collect();
    let (sols, count) = close_two(c64(-links[0], 0.0), links[1], links[2], 1e-6);
    if count == 0 {
        return Ok(UnistoVerdict::rejected(Method::Exact3, -report.margin()));
    }
    let (p1, p2) = sols[0];
    let phases = [0.0, -p1, -p2];
    let c0: Vec<Complex64> = (0..3).map(|i| c64(sq(i, 0), 0.0)).collect();
    let c1: Vec<Complex64> = (0..3).map(|i| Complex64::from_polar(sq(i, 1), phases[i])).collect();
    let cross = [
        c0[1] * c1[2] - c0[2] * c1[1],
        c0[2] * c1[0] - c0[0] * c1[2],
        c0[0] * c1[1] - c0[1] * c1[0],
    ];
    let u = CMatrix::from_fn(3, |i, j| match j {
        0 => c0[i],
        1 => c1[i],
        _ => cross[i].conj(),
    });
    let v = UnistoVerdict::certified(b, u, Method::Exact3);
    if v.residual > tol.matching.max(tol.unit) {
        // only reachable within the chain slack of the boundary
        return Ok(UnistoVerdict::rejected(Method::Exact3, v.residual));
    }
    Ok(v)
}
