use crate::matrix::{c64, CMatrix};

use super::field::{field_of_order, is_prime, jacobsthal};
use super::{is_conference, is_robust, is_skew, HadamardError, DEFAULT_TOL};

/// Integer square matrix, used so that the combinatorial constructions can be
/// verified exactly before being converted to floating point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    n: usize,
    data: Vec<i64>,
}

impl SignMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    /// `M Mᵀ`
    pub fn gram(&self) -> Self {
        Self::from_fn(self.n, |i, j| (0..self.n).map(|k| self.get(i, k) * self.get(j, k)).sum())
    }

    pub fn is_scalar(&self, c: i64) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == if i == j { c } else { 0 }))
    }

    /// `H + Hᵀ = 2I` and `HHᵀ = nI`, exactly.
    pub fn is_skew_hadamard(&self) -> bool {
        let n = self.n;
        self.data.iter().all(|&x| x == 1 || x == -1)
            && (0..n).all(|i| (0..n).all(|j| self.get(i, j) + self.get(j, i) == if i == j { 2 } else { 0 }))
            && self.gram().is_scalar(n as i64)
    }

    /// Zero diagonal, ±1 elsewhere, symmetric, `CCᵀ = (n-1)I`, exactly.
    pub fn is_symmetric_conference(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (0..n).all(|j| {
                let x = self.get(i, j);
                if i == j {
                    x == 0
                } else {
                    (x == 1 || x == -1) && x == self.get(j, i)
                }
            })
        }) && self.gram().is_scalar(n as i64 - 1)
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| c64(self.get(i, j) as f64, 0.0))
    }

    /// Exact conversion of a matrix whose entries are integers.
    pub fn from_cmatrix(m: &CMatrix) -> Option<Self> {
        let mut data = Vec::with_capacity(m.order() * m.order());
        for z in m.entries() {
            if z.im != 0.0 || z.re.fract() != 0.0 {
                return None;
            }
            data.push(z.re as i64);
        }
        Some(Self { n: m.order(), data })
    }

    /// `[[H, H], [-Hᵀ, Hᵀ]]`
    fn doubled(&self) -> Self {
        let n = self.n;
        Self::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.get(i, j),
            (true, false) => self.get(i, j - n),
            (false, true) => -self.get(j, i - n),
            (false, false) => self.get(j - n, i - n),
        })
    }
}

/// Way a skew Hadamard matrix of a given order is reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkewRoute {
    Base2,
    Paley { q: usize },
    Doubling { half: usize },
}

/// Picks a construction for a skew Hadamard matrix of order `n`: order 2,
/// Paley for `n - 1` a prime ≡ 3 (mod 4), otherwise doubling.
pub fn skew_route(n: usize) -> Option<SkewRoute> {
    if n == 2 {
        return Some(SkewRoute::Base2);
    }
    if n >= 4 && is_prime(n - 1) && (n - 1) % 4 == 3 {
        return Some(SkewRoute::Paley { q: n - 1 });
    }
    if n >= 4 && n.is_multiple_of(2) && skew_route(n / 2).is_some() {
        return Some(SkewRoute::Doubling { half: n / 2 });
    }
    None
}

fn reachable(limit: usize, pred: impl Fn(usize) -> bool) -> String {
    (1..=limit).filter(|&n| pred(n)).map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
}

/// Skew Hadamard matrix of order `n` with exact integer entries.
pub fn paley_skew_exact(n: usize) -> Result<SignMatrix, HadamardError> {
    let route = skew_route(n).ok_or_else(|| HadamardError::UnsupportedOrder {
        n,
        reason: format!(
            "no skew construction (orders reachable up to 64: {})",
            reachable(64, |k| skew_route(k).is_some())
        ),
    })?;
    let h = match route {
        SkewRoute::Base2 => SignMatrix { n: 2, data: vec![1, 1, -1, 1] },
        SkewRoute::Paley { q } => {
            let field = field_of_order(q).expect("q is prime");
            let jac = jacobsthal(field.as_ref());
            // I + S with S = [[0, 1ᵀ], [-1, Qᵀ]] skew-symmetric
            SignMatrix::from_fn(q + 1, |i, j| match (i, j) {
                (0, 0) => 1,
                (0, _) => 1,
                (_, 0) => -1,
                (i, j) if i == j => 1,
                (i, j) => jac[j - 1][i - 1] as i64,
            })
        }
        SkewRoute::Doubling { half } => paley_skew_exact(half)?.doubled(),
    };
    if !h.is_skew_hadamard() {
        return Err(HadamardError::ConstructionFailed(format!("skew construction of order {n} failed verification")));
    }
    Ok(h)
}

/// Skew Hadamard matrix (`H + Hᵀ = 2I`) of order `n`.
pub fn paley_skew(n: usize) -> Result<CMatrix, HadamardError> {
    paley_skew_exact(n).map(|h| h.to_cmatrix())
}

/// Doubles a skew Hadamard matrix via `[[H, H], [-Hᵀ, Hᵀ]]`.
pub fn double_skew(h: &CMatrix) -> Result<CMatrix, HadamardError> {
    if !is_skew(h, DEFAULT_TOL) {
        return Err(HadamardError::InputNotSkew);
    }
    let out = match SignMatrix::from_cmatrix(h) {
        Some(exact) => exact.doubled().to_cmatrix(),
        None => {
            let n = h.order();
            CMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
                (true, true) => h[(i, j)],
                (true, false) => h[(i, j - n)],
                (false, true) => -h[(j, i - n)],
                (false, false) => h[(j - n, i - n)],
            })
        }
    };
    if !is_skew(&out, DEFAULT_TOL) {
        return Err(HadamardError::ConstructionFailed("doubled matrix is not skew Hadamard".into()));
    }
    Ok(out)
}

fn conference_supported(n: usize) -> bool {
    n >= 2 && (n - 1) % 4 == 1 && field_of_order(n - 1).is_some()
}

/// Symmetric conference matrix of order `n` with exact integer entries.
pub fn conference_paley_exact(n: usize) -> Result<SignMatrix, HadamardError> {
    if !conference_supported(n) {
        let reason = if n % 2 == 1 {
            "symmetric conference matrices have even order".to_string()
        } else if n == 22 {
            "none exists: 21 is not a sum of two squares".to_string()
        } else {
            format!(
                "needs n-1 a prime or 9, congruent to 1 mod 4 (supported up to 64: {})",
                reachable(64, conference_supported)
            )
        };
        return Err(HadamardError::UnsupportedOrder { n, reason });
    }
    let q = n - 1;
    let jac = jacobsthal(field_of_order(q).expect("checked above").as_ref());
    let c = SignMatrix::from_fn(n, |i, j| match (i, j) {
        (0, 0) => 0,
        (0, _) | (_, 0) => 1,
        (i, j) => jac[i - 1][j - 1] as i64,
    });
    if !c.is_symmetric_conference() {
        return Err(HadamardError::ConstructionFailed(format!("conference construction of order {n} failed")));
    }
    Ok(c)
}

/// Symmetric conference matrix of order `n` (Paley, `n - 1 ≡ 1 mod 4`).
pub fn conference_paley(n: usize) -> Result<CMatrix, HadamardError> {
    conference_paley_exact(n).map(|c| c.to_cmatrix())
}

/// `C + iI`, a complex robust Hadamard matrix.
pub fn robust_from_conference(c: &CMatrix) -> Result<CMatrix, HadamardError> {
    if !is_conference(c, DEFAULT_TOL) {
        return Err(HadamardError::InputNotConference);
    }
    let mut h = c.clone();
    for i in 0..h.order() {
        h[(i, i)] += c64(0.0, 1.0);
    }
    Ok(h)
}

/// A robust Hadamard matrix of even order `n`: real skew when `n = 2` or
/// `n ≡ 0 (mod 4)`, `C + iI` from a symmetric conference matrix otherwise.
pub fn robust_for_order(n: usize) -> Result<CMatrix, HadamardError> {
    if n % 2 == 1 || n == 0 {
        return Err(HadamardError::UnsupportedOrder {
            n,
            reason: "robust Hadamard matrices exist only in even orders".into(),
        });
    }
    if n == 2 || n.is_multiple_of(4) {
        paley_skew(n)
    } else {
        robust_from_conference(&conference_paley(n)?)
    }
}

/// Negates the columns of a real robust matrix that carry `-1` on the
/// diagonal, producing a sign-equivalent skew Hadamard matrix.
pub fn skew_normalize(h: &CMatrix) -> Result<CMatrix, HadamardError> {
    if !h.is_real(DEFAULT_TOL) || !is_robust(h, DEFAULT_TOL) {
        return Err(HadamardError::InputNotRobust);
    }
    let n = h.order();
    let signs: Vec<f64> = (0..n).map(|j| if h[(j, j)].re < 0.0 { -1.0 } else { 1.0 }).collect();
    let out = CMatrix::from_fn(n, |i, j| h[(i, j)] * signs[j]);
    if !is_skew(&out, DEFAULT_TOL) {
        return Err(HadamardError::ConstructionFailed("normalized matrix is not skew".into()));
    }
    Ok(out)
}

/// Brings a robust matrix `R` to the form `H = iRD* = C + iI`, returning the
/// self-adjoint complex conference matrix `C` and `D = diag(R)`.
pub fn selfadjoint_conference_form(r: &CMatrix) -> Result<(CMatrix, CMatrix), HadamardError> {
    if !is_robust(r, DEFAULT_TOL) {
        return Err(HadamardError::InputNotRobust);
    }
    let d = r.diagonal_part();
    let h = r.matmul(&d.conj_transpose()).expect("same order").scale(c64(0.0, 1.0));
    let mut c = h;
    for i in 0..c.order() {
        c[(i, i)] -= c64(0.0, 1.0);
    }
    Ok((c, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::{is_hadamard, principal_minor_dets};

    #[test]
    fn skew_orders_are_exact() {
        for n in [2, 4, 8, 12, 16, 20, 24, 32] {
            let h = paley_skew_exact(n).unwrap();
            assert!(h.is_skew_hadamard(), "order {n}");
            assert_eq!(h.gram(), SignMatrix::from_fn(n, |i, j| if i == j { n as i64 } else { 0 }));
        }
        assert_eq!(skew_route(16), Some(SkewRoute::Doubling { half: 8 }));
        assert_eq!(skew_route(20), Some(SkewRoute::Paley { q: 19 }));
    }

    #[test]
    fn unsupported_skew_orders() {
        for n in [1, 3, 6, 10, 14] {
            assert!(matches!(paley_skew(n), Err(HadamardError::UnsupportedOrder { .. })), "order {n}");
        }
        let HadamardError::UnsupportedOrder { reason, .. } = paley_skew(6).unwrap_err() else { unreachable!() };
        assert!(reason.contains("20"));
    }

    #[test]
    fn conference_orders() {
        for n in [6, 10, 14, 18] {
            let c = conference_paley_exact(n).unwrap();
            assert!(c.is_symmetric_conference());
            assert!(c.gram().is_scalar(n as i64 - 1));
        }
        for n in [5, 22, 26] {
            assert!(matches!(conference_paley(n), Err(HadamardError::UnsupportedOrder { .. })), "order {n}");
        }
        let HadamardError::UnsupportedOrder { reason, .. } = conference_paley(22).unwrap_err() else { unreachable!() };
        assert!(reason.contains("sum of two squares"));
    }

    #[test]
    fn double_skew_cases() {
        let h16 = double_skew(&paley_skew(8).unwrap()).unwrap();
        assert!(SignMatrix::from_cmatrix(&h16).unwrap().is_skew_hadamard());
        let h2 = CMatrix::from_real(2, &[1.0, 1.0, -1.0, 1.0]).unwrap();
        let h4 = double_skew(&h2).unwrap();
        assert!(SignMatrix::from_cmatrix(&h4).unwrap().is_skew_hadamard());
        let h4r = CMatrix::from_real(4, &[1., 1., 1., 1., 1., -1., -1., 1., 1., 1., -1., -1., 1., -1., 1., -1.]).unwrap();
        assert!(matches!(double_skew(&h4r), Err(HadamardError::InputNotSkew)));
    }

    #[test]
    fn conference_route_gives_det_minus_two() {
        let r = robust_from_conference(&conference_paley(6).unwrap()).unwrap();
        assert!(is_robust(&r, 1e-12));
        for d in principal_minor_dets(&r) {
            assert!((d - c64(-2.0, 0.0)).norm() < 1e-12);
        }
        assert!(is_robust(&robust_from_conference(&conference_paley(10).unwrap()).unwrap(), 1e-12));
        let h2 = CMatrix::from_real(2, &[1.0, 1.0, 1.0, -1.0]).unwrap();
        assert!(matches!(robust_from_conference(&h2), Err(HadamardError::InputNotConference)));
    }

    #[test]
    fn robust_for_every_even_order() {
        for n in (2..=20).step_by(2) {
            let r = robust_for_order(n).unwrap();
            assert!(is_hadamard(&r, 1e-12) && is_robust(&r, 1e-12), "order {n}");
            assert_eq!(r.is_real(0.0), n == 2 || n % 4 == 0, "order {n}");
        }
        assert!(is_skew(&robust_for_order(12).unwrap(), 1e-12));
        assert!(!robust_for_order(14).unwrap().is_real(0.0));
        for n in [3, 5, 7] {
            assert!(matches!(robust_for_order(n), Err(HadamardError::UnsupportedOrder { .. })));
        }
    }

    #[test]
    fn skew_normalize_cases() {
        let h4r = CMatrix::from_real(4, &[1., 1., 1., 1., 1., -1., -1., 1., 1., 1., -1., -1., 1., -1., 1., -1.]).unwrap();
        let s = skew_normalize(&h4r).unwrap();
        assert!(is_skew(&s, 1e-12));
        // column signs only
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s[(i, j)].re.abs(), h4r[(i, j)].re.abs());
            }
        }
        let already = paley_skew(8).unwrap();
        assert_eq!(skew_normalize(&already).unwrap(), already);
        let complex = robust_for_order(6).unwrap();
        assert!(matches!(skew_normalize(&complex), Err(HadamardError::InputNotRobust)));
    }

    #[test]
    fn selfadjoint_form_of_conference_route_is_the_input() {
        let c6 = conference_paley(6).unwrap();
        let (c, d) = selfadjoint_conference_form(&robust_from_conference(&c6).unwrap()).unwrap();
        assert!(c.max_abs_diff(&c6).unwrap() < 1e-15);
        assert!(d.max_abs_diff(&CMatrix::identity(6).scale(c64(0.0, 1.0))).unwrap() < 1e-15);
        let not_robust = CMatrix::from_real(4, &[1., 1., 1., 1., 1., -1., 1., -1., 1., 1., -1., -1., 1., -1., -1., 1.]).unwrap();
        assert!(matches!(selfadjoint_conference_form(&not_robust), Err(HadamardError::InputNotRobust)));
    }
}
