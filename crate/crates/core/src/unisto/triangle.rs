use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::birkhoff::{is_strongly_complementary, relative_perm, triangle_point};
use crate::hadamard::{is_robust, robust_for_order, DEFAULT_TOL};
use crate::matrix::{c64, BistoMatrix, CMatrix, PermMatrix, Tolerances};

use super::{Method, UnistoError, UnistoVerdict};

/// A robust Hadamard matrix together with a pairing `s` of its indices such
/// that both `H` and `H` with the paired columns swapped are robust.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedRobust {
    pub matrix: CMatrix,
    pub pairing: Vec<usize>,
}

fn orthogonal_rows(h: &CMatrix, rows: (usize, usize), cols: (usize, usize)) -> bool {
    let (r0, r1) = rows;
    let (c0, c1) = cols;
    (h[(r0, c0)] * h[(r1, c0)].conj() + h[(r0, c1)] * h[(r1, c1)].conj()).norm() <= DEFAULT_TOL
}

/// The four 2×2 minors linking pairs `(i, si)` and `(j, sj)` must be
/// Hadamard for the blend of diagonal, paired and remaining entries to stay
/// unitary.
fn pairs_compatible(h: &CMatrix, (i, si): (usize, usize), (j, sj): (usize, usize)) -> bool {
    orthogonal_rows(h, (i, j), (si, sj))
        && orthogonal_rows(h, (i, sj), (si, j))
        && orthogonal_rows(h, (si, j), (i, sj))
        && orthogonal_rows(h, (si, sj), (i, j))
}

/// Backtracking search for a perfect pairing compatible with `h`.
pub fn find_pairing(h: &CMatrix) -> Option<Vec<usize>> {
    fn rec(h: &CMatrix, s: &mut Vec<usize>, pairs: &mut Vec<(usize, usize)>) -> bool {
        let n = h.order();
        let Some(a) = (0..n).find(|&k| s[k] == usize::MAX) else { return true };
        for b in a + 1..n {
            if s[b] != usize::MAX || !pairs.iter().all(|&p| pairs_compatible(h, (a, b), p)) {
                continue;
            }
            s[a] = b;
            s[b] = a;
            pairs.push((a, b));
            if rec(h, s, pairs) {
                return true;
            }
            pairs.pop();
            s[a] = usize::MAX;
            s[b] = usize::MAX;
        }
        false
    }
    let n = h.order();
    if n % 2 == 1 {
        return None;
    }
    let mut s = vec![usize::MAX; n];
    rec(h, &mut s, &mut Vec::with_capacity(n / 2)).then_some(s)
}

impl AlignedRobust {
    pub fn new(matrix: CMatrix) -> Option<Self> {
        if !is_robust(&matrix, DEFAULT_TOL) {
            return None;
        }
        let pairing = find_pairing(&matrix)?;
        Some(Self { matrix, pairing })
    }

    /// Simultaneous relabelling `π` of rows and columns such that the
    /// pairing lands on the pairs of the fixed-point-free involution `sigma`.
    fn relabelled(&self, sigma: &PermMatrix) -> CMatrix {
        let n = self.matrix.order();
        let mut pi = vec![0; n];
        let ours = (0..n).filter(|&a| a < self.pairing[a]);
        let theirs = (0..n).filter(|&i| i < sigma.apply(i));
        for (a, i) in ours.zip(theirs) {
            pi[i] = a;
            pi[sigma.apply(i)] = self.pairing[a];
        }
        self.matrix.permuted(&pi, &pi)
    }
}

type AlignCache = Mutex<HashMap<usize, Option<Arc<AlignedRobust>>>>;

/// Aligned version of [`robust_for_order`], cached per order.
pub fn align_robust(n: usize) -> Option<Arc<AlignedRobust>> {
    static CACHE: OnceLock<AlignCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("cache lock").get(&n) {
        return hit.clone();
    }
    let found = robust_for_order(n).ok().and_then(AlignedRobust::new).map(Arc::new);
    cache.lock().expect("cache lock").insert(n, found.clone());
    found
}

/// Barycentric weights of `b` in the triangle of `P`, `Q` and the flat
/// matrix, and the fit residual.
fn triangle_weights(p: &PermMatrix, q: &PermMatrix, b: &BistoMatrix) -> (f64, f64, f64) {
    let n = b.order();
    let mut on_p = 0.0;
    let mut on_q = 0.0;
    let mut rest = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = b.get(i, j);
            if j == p.apply(i) {
                on_p += x;
            } else if j == q.apply(i) {
                on_q += x;
            } else {
                rest += x;
            }
        }
    }
    let others = n * n - 2 * n;
    let c = if others == 0 { 0.0 } else { rest / others as f64 };
    let wa = on_p / n as f64 - c;
    let wq = on_q / n as f64 - c;
    let residual = match triangle_point(p, q, wa.max(0.0), wq.max(0.0)) {
        Ok(t) => t.max_abs_diff(b).max(-wa).max(-wq),
        Err(_) => f64::INFINITY,
    };
    (wa, wq, residual)
}

/// Certificate `P·(√(PᵀB) ∘ H')` for `b` in the triangle spanned by
/// strongly complementary `P`, `Q` and the flat matrix, where `H'` is the
/// aligned robust matrix relabelled onto the pairs of `PᵀQ`.
pub fn triangle_certificate(
    p: &PermMatrix,
    q: &PermMatrix,
    b: &BistoMatrix,
    hr: &AlignedRobust,
    tol: &Tolerances,
) -> Result<UnistoVerdict, UnistoError> {
    if !is_strongly_complementary(p, q) {
        return Err(crate::birkhoff::BirkhoffError::NotStronglyComplementary.into());
    }
    let n = b.order();
    if hr.matrix.order() != n {
        return Err(UnistoError::WrongOrder { expected: n, actual: hr.matrix.order() });
    }
    let (_, _, residual) = triangle_weights(p, q, b);
    if residual > tol.bis {
        return Err(UnistoError::NotInTriangle { residual });
    }
    let sigma = relative_perm(p, q)?;
    let h = hr.relabelled(&sigma);
    let s = b.sqrt_entries();
    let pinv = p.transpose();
    // row k of the reduced matrix PᵀB is row σP⁻¹(k) of B
    let v = CMatrix::from_fn(n, |k, j| h[(k, j)] * c64(s[pinv.apply(k) * n + j], 0.0));
    let u = CMatrix::from_fn(n, |i, j| v[(p.apply(i), j)]);
    let verdict = UnistoVerdict::certified(b, u, Method::TriangleCertificate);
    if verdict.residual > tol.unit.min(tol.matching) {
        return Err(UnistoError::AlignmentFailed);
    }
    Ok(verdict)
}

/// Recovers a strongly complementary pair `(P, Q)` whose triangle with the
/// flat matrix contains `b`, if the support pattern allows it.
pub fn detect_triangle(b: &BistoMatrix, tol: &Tolerances) -> Option<(PermMatrix, PermMatrix)> {
    let n = b.order();
    if n < 4 || n % 2 == 1 {
        return None;
    }
    let c = b.min_entry();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let support: Vec<usize> = (0..n).filter(|&j| b.get(i, j) - c > tol.bis).collect();
        if support.len() != 2 {
            return None;
        }
        cols.push((support[0], support[1]));
    }
    let excess = |i: usize, j: usize| b.get(i, j) - c;
    let gap = (0..n).map(|i| (excess(i, cols[i].0) - excess(i, cols[i].1)).abs()).fold(0.0, f64::max);
    let mut p_img = vec![0; n];
    let mut q_img = vec![0; n];
    if gap > tol.bis {
        for (i, &(j1, j2)) in cols.iter().enumerate() {
            let (hi, lo) = if excess(i, j1) >= excess(i, j2) { (j1, j2) } else { (j2, j1) };
            p_img[i] = hi;
            q_img[i] = lo;
        }
    } else {
        // equal weights: orient every 2×2 block diagonally
        let mut partner_seen: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, &pair) in cols.iter().enumerate() {
            if let Some(&first) = partner_seen.get(&pair) {
                p_img[i] = pair.1;
                q_img[i] = pair.0;
                p_img[first] = pair.0;
                q_img[first] = pair.1;
            } else {
                partner_seen.insert(pair, i);
            }
        }
    }
    let p = PermMatrix::new(p_img).ok()?;
    let q = PermMatrix::new(q_img).ok()?;
    let (_, _, residual) = triangle_weights(&p, &q, b);
    (is_strongly_complementary(&p, &q) && residual <= tol.bis).then_some((p, q))
}
