//! Order-4 decision by a one-parameter phase sweep.
//!
//! After dephasing, the first row and column of a candidate unitary are the
//! real square roots of `B`. One free phase `φ` on `U[1][1]` fixes the rest
//! of row 1 and column 1 through two polygon closures (each with up to two
//! mirror solutions). The lower-right block then follows from orthogonality
//! as `D = -Y A* (X*)⁻¹`, and `B` is unistochastic iff, for some `φ` and some
//! branch, `|D[0][0]|² = B[2][2]`.

use std::f64::consts::PI;

use crate::matrix::{c64, BistoMatrix, CMatrix, Complex64, Tolerances};

use super::chain::chain_conditions_with;
use super::closure::close_two;
use super::{Method, UnistoError, UnistoVerdict};

pub const DEFAULT_PHI_GRID: usize = 2048;

type C = Complex64;
type Block = [[C; 2]; 2];

const BRANCHES: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Entries at or below this count as zero when picking block arrangements.
const ZERO_ENTRY: f64 = 1e-12;
/// Closure cosine overshoot tolerated before a phase is declared infeasible.
const CLOSURE_SLACK: f64 = 1e-12;

struct Sample {
    u: [[C; 4]; 4],
    g: f64,
}

struct Sweep {
    b: [[f64; 4]; 4],
    s: [[f64; 4]; 4],
    row_links: [f64; 4],
    col_links: [f64; 4],
    tol: Tolerances,
    min_abs_g: f64,
}

fn inv2(m: &Block) -> Option<Block> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() < 1e-13 {
        return None;
    }
    let r = det.inv();
    Some([[m[1][1] * r, -m[0][1] * r], [-m[1][0] * r, m[0][0] * r]])
}

fn mul2(a: &Block, b: &Block) -> Block {
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn adj2(a: &Block) -> Block {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

impl Sweep {
    fn new(b: [[f64; 4]; 4], tol: Tolerances) -> Self {
        let s = b.map(|row| row.map(|x| x.max(0.0).sqrt()));
        let row_links = std::array::from_fn(|j| s[0][j] * s[1][j]);
        let col_links = std::array::from_fn(|i| s[i][0] * s[i][1]);
        Self { b, s, row_links, col_links, tol, min_abs_g: f64::INFINITY }
    }

    fn build(&mut self, phi: f64, (ba, bb): (usize, usize)) -> Option<Sample> {
        let e = C::from_polar(1.0, phi);
        let (l, m, s) = (&self.row_links, &self.col_links, &self.s);
        let (ra, ka) = close_two(-(l[0] + e * l[1]), l[2], l[3], CLOSURE_SLACK);
        if ba >= ka {
            return None;
        }
        let (rb, kb) = close_two(-(m[0] + e * m[1]), m[2], m[3], CLOSURE_SLACK);
        if bb >= kb {
            return None;
        }
        let (a1, a2) = ra[ba];
        let (b1, b2) = rb[bb];
        let mut u = [[C::new(0.0, 0.0); 4]; 4];
        for k in 0..4 {
            u[0][k] = c64(s[0][k], 0.0);
            u[k][0] = c64(s[k][0], 0.0);
        }
        u[1][1] = C::from_polar(s[1][1], phi);
        u[1][2] = C::from_polar(s[1][2], a1);
        u[1][3] = C::from_polar(s[1][3], a2);
        u[2][1] = C::from_polar(s[2][1], b1);
        u[3][1] = C::from_polar(s[3][1], b2);
        let a = [[u[0][0], u[0][1]], [u[1][0], u[1][1]]];
        let x = [[u[0][2], u[0][3]], [u[1][2], u[1][3]]];
        let y = [[u[2][0], u[2][1]], [u[3][0], u[3][1]]];
        let xinv = inv2(&adj2(&x))?;
        let d = mul2(&mul2(&y, &adj2(&a)), &xinv);
        for i in 0..2 {
            for j in 0..2 {
                u[2 + i][2 + j] = -d[i][j];
            }
        }
        let g = d[0][0].norm_sqr() - self.b[2][2];
        self.min_abs_g = self.min_abs_g.min(g.abs());
        Some(Sample { u, g })
    }

    fn verified(&self, u: &[[C; 4]; 4]) -> bool {
        let mut worst_unit = 0.0f64;
        let mut worst_mod = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let dot: C = (0..4).map(|k| u[i][k] * u[j][k].conj()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst_unit = worst_unit.max((dot - target).norm());
                worst_mod = worst_mod.max((u[i][j].norm_sqr() - self.b[i][j]).abs());
            }
        }
        worst_unit <= self.tol.unit && worst_mod <= self.tol.matching
    }

    fn accept(&mut self, phi: f64, br: (usize, usize)) -> Option<[[C; 4]; 4]> {
        let s = self.build(phi, br)?;
        self.verified(&s.u).then_some(s.u)
    }

    /// Bisects `g` along a path `t ∈ [lo, hi]`, given `g(lo) = g_lo` and a
    /// sign change somewhere before `hi`.
    fn bisect_path(
        &mut self,
        mut lo: f64,
        mut g_lo: f64,
        mut hi: f64,
        at: &dyn Fn(f64) -> (f64, (usize, usize)),
    ) -> Option<[[C; 4]; 4]> {
        for _ in 0..200 {
            if hi - lo <= self.tol.root {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let (phi, br) = at(mid);
            let g = self.build(phi, br)?.g;
            if (g > 0.0) == (g_lo > 0.0) {
                lo = mid;
                g_lo = g;
            } else {
                hi = mid;
            }
        }
        for t in [0.5 * (lo + hi), lo, hi] {
            let (phi, br) = at(t);
            if let Some(u) = self.accept(phi, br) {
                return Some(u);
            }
        }
        None
    }

    /// Handles the end of a feasible `φ` interval between the feasible
    /// `phi_in` and the infeasible `phi_out`. At the fold point two branches
    /// meet; the curve running out on `br` and back on its partner is
    /// continuous, so sign changes along it are roots as well.
    fn fold(&mut self, phi_in: f64, g_in: f64, phi_out: f64, br: (usize, usize)) -> Option<[[C; 4]; 4]> {
        let (mut lo, mut hi) = (phi_in, phi_out);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.build(mid, br).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let phi_b = lo;
        let g_b = self.build(phi_b, br)?.g;
        if g_b.abs() <= self.tol.matching {
            if let Some(u) = self.accept(phi_b, br) {
                return Some(u);
            }
        }
        let partner = [(1 - br.0, br.1), (br.0, 1 - br.1), (1 - br.0, 1 - br.1)]
            .into_iter()
            .filter_map(|p| self.build(phi_b, p).map(|s| (p, (s.g - g_b).abs())))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(p, _)| p)?;
        let g_partner = self.build(phi_in, partner)?.g;
        // t in [0, 1] runs phi_in -> phi_b on br, t in [1, 2] returns on the partner
        let path = move |t: f64| {
            if t <= 1.0 {
                (phi_in + t * (phi_b - phi_in), br)
            } else {
                (phi_b + (t - 1.0) * (phi_in - phi_b), partner)
            }
        };
        if (g_in > 0.0) != (g_b > 0.0) {
            if let Some(u) = self.bisect_path(0.0, g_in, 1.0, &path) {
                return Some(u);
            }
        }
        if (g_b > 0.0) != (g_partner > 0.0) {
            if let Some(u) = self.bisect_path(1.0, g_b, 2.0, &path) {
                return Some(u);
            }
        }
        None
    }

    fn run(&mut self, grid: usize) -> Option<[[C; 4]; 4]> {
        let step = 2.0 * PI / grid as f64;
        for br in BRANCHES {
            let mut prev: Option<(f64, f64)> = None;
            let mut prev_phi = None;
            for k in 0..=grid {
                let phi = k as f64 * step;
                let cur = self.build(phi, br).map(|s| s.g);
                match (prev, cur) {
                    (Some((p_phi, p_g)), Some(g)) => {
                        if (p_g > 0.0) != (g > 0.0) {
                            if let Some(u) = self.bisect_path(p_phi, p_g, phi, &|t| (t, br)) {
                                return Some(u);
                            }
                        }
                    }
                    (Some((p_phi, p_g)), None) => {
                        if let Some(u) = self.fold(p_phi, p_g, phi, br) {
                            return Some(u);
                        }
                    }
                    (None, Some(g)) => {
                        if let Some(p_phi) = prev_phi {
                            if let Some(u) = self.fold(phi, g, p_phi, br) {
                                return Some(u);
                            }
                        }
                    }
                    (None, None) => {}
                }
                if let Some(g) = cur {
                    if g.abs() <= self.tol.matching {
                        if let Some(u) = self.accept(phi, br) {
                            return Some(u);
                        }
                    }
                }
                prev = cur.map(|g| (phi, g));
                prev_phi = Some(phi);
            }
        }
        None
    }
}

/// Row/column pair choices for the upper-left block, by ascending block sum.
fn arrangements(b: &BistoMatrix) -> Vec<(f64, [usize; 4], [usize; 4])> {
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let complete = |(x, y): (usize, usize)| {
        let mut rest = (0..4).filter(|&k| k != x && k != y);
        [x, y, rest.next().expect("two left"), rest.next().expect("one left")]
    };
    let mut out = Vec::with_capacity(36);
    for &r in &pairs {
        for &c in &pairs {
            let sum = b.get(r.0, c.0) + b.get(r.0, c.1) + b.get(r.1, c.0) + b.get(r.1, c.1);
            out.push((sum, complete(r), complete(c)));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Whether a closure in the sweep can collapse to two equal links summing to
/// zero. There the remaining phase pair is a continuous family the sweep
/// cannot follow.
fn cancelling_links(b: &BistoMatrix, (_, rows, cols): &(f64, [usize; 4], [usize; 4])) -> bool {
    let link = |r0: usize, r1: usize, c: usize| (b.get(r0, c) * b.get(r1, c)).sqrt();
    let near = |x: f64, y: f64| (x - y).abs() <= 1e-12;
    let row = |k: usize| link(rows[0], rows[1], cols[k]);
    let col = |k: usize| (b.get(rows[k], cols[0]) * b.get(rows[k], cols[1])).sqrt();
    (near(row(0), row(1)) && near(row(2), row(3))) || (near(col(0), col(1)) && near(col(2), col(3)))
}

fn flat_certificate() -> CMatrix {
    let h = [1., 1., 1., 1., 1., -1., 1., -1., 1., 1., -1., -1., 1., -1., -1., 1.];
    CMatrix::from_real(4, &h.map(|x| 0.5 * x)).expect("16 entries")
}

/// Decides unistochasticity of an order-4 bistochastic matrix.
///
/// The upper-left 2×2 block is arranged to have sum below 1 (so the block
/// `X` stays invertible). Matrices with zero entries, or whose smallest
/// arrangement has cancelling links, try every admissible arrangement;
/// others only the smallest. A root of `g` is accepted only
/// after the reconstructed unitary passes `tol.unit` and `tol.matching`.
/// Without a root the verdict is `NotUnistochastic`, or `Undecided` when
/// `min |g|` came within `10·tol.matching` of zero.
pub fn haagerup4(b: &BistoMatrix, tol: &Tolerances, phi_grid: usize) -> Result<UnistoVerdict, UnistoError> {
    if b.order() != 4 {
        return Err(UnistoError::WrongOrder { expected: 4, actual: b.order() });
    }
    if b.entries().iter().all(|&x| (x - 0.25).abs() <= tol.bis) {
        return Ok(UnistoVerdict::certified(b, flat_certificate(), Method::Haagerup4));
    }
    let report = chain_conditions_with(b, tol.bis);
    if !report.pass {
        return Ok(UnistoVerdict::rejected(Method::ChainViolation, -report.margin()));
    }
    let admissible: Vec<_> = arrangements(b).into_iter().filter(|a| a.0 < 1.0 - tol.bis).collect();
    let degenerate = b.min_entry() <= ZERO_ENTRY || admissible.first().is_some_and(|a| cancelling_links(b, a));
    let mut candidates: Vec<_> = admissible.into_iter().take(if degenerate { 36 } else { 1 }).collect();
    // arrangements without cancelling links go first
    candidates.sort_by_key(|a| cancelling_links(b, a));
    if candidates.is_empty() {
        return Ok(UnistoVerdict::undecided(Method::Haagerup4, 0.0));
    }
    let grid = phi_grid.max(8);
    let mut min_abs_g = f64::INFINITY;
    for (_, rows, cols) in candidates {
        let arranged: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| b.get(rows[i], cols[j])));
        let mut sweep = Sweep::new(arranged, *tol);
        let found = sweep.run(grid);
        min_abs_g = min_abs_g.min(sweep.min_abs_g);
        if let Some(u) = found {
            let mut full = CMatrix::zeros(4);
            for i in 0..4 {
                for j in 0..4 {
                    full[(rows[i], cols[j])] = u[i][j];
                }
            }
            return Ok(UnistoVerdict::certified(b, full, Method::Haagerup4));
        }
    }
    if min_abs_g < 10.0 * tol.matching {
        Ok(UnistoVerdict::undecided(Method::Haagerup4, min_abs_g))
    } else {
        Ok(UnistoVerdict::rejected(Method::Haagerup4, min_abs_g))
    }
}
