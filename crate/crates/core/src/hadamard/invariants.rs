use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::matrix::{CMatrix, Complex64};

use super::{is_hadamard, HadamardError, DEFAULT_TOL};

pub const DEFAULT_PHASE_QUANTUM: f64 = 1e-9;

/// `F[j][k] = exp(2πi jk / n)`.
pub fn fourier(n: usize) -> CMatrix {
    CMatrix::from_fn(n, |j, k| {
        let e = (j * k) % n;
        Complex64::from_polar(1.0, 2.0 * PI * e as f64 / n as f64)
    })
}

/// Multiset of phases in `(-π, π]`, each stored as an integer multiple of a
/// fixed quantum.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantSet {
    quantum: f64,
    counts: BTreeMap<i64, usize>,
}

impl InvariantSet {
    pub fn new(quantum: f64) -> Self {
        assert!(quantum > 0.0 && quantum.is_finite(), "phase quantum must be positive");
        Self { quantum, counts: BTreeMap::new() }
    }

    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    /// Quantized key of a phase. A bin centred on `-π` is the same bin as
    /// the one centred on `+π`.
    pub fn key(&self, phase: f64) -> i64 {
        let mut p = phase.rem_euclid(2.0 * PI);
        if p > PI {
            p -= 2.0 * PI;
        }
        let k = (p / self.quantum).round() as i64;
        if (k as f64) * self.quantum <= -PI + self.quantum / 4.0 {
            return ((p + 2.0 * PI) / self.quantum).round() as i64;
        }
        k
    }

    pub fn insert_phase(&mut self, phase: f64) {
        let k = self.key(phase);
        self.insert_key(k);
    }

    fn insert_key(&mut self, key: i64) {
        *self.counts.entry(key).or_insert(0) += 1;
    }

    /// Number of stored values, with multiplicity.
    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Distinct phases with multiplicities, ascending.
    pub fn phases(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.counts.iter().map(move |(&k, &c)| (k as f64 * self.quantum, c))
    }

    /// Whether some stored phase lies within `tol` of `phi` on the circle.
    pub fn contains_phase(&self, phi: f64, tol: f64) -> bool {
        self.phases().any(|(p, _)| {
            let d = (p - phi).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d) <= tol
        })
    }

    /// Closed under conjugation: each phase occurs as often as its negative.
    pub fn is_conjugation_closed(&self) -> bool {
        let top = self.key(PI);
        self.counts.iter().all(|(&k, &c)| {
            let neg = if k == top { top } else { -k };
            self.counts.get(&neg) == Some(&c)
        })
    }
}

/// All `n⁴` values `H_ij conj(H_kj) H_kl conj(H_il)` as quantized phases.
pub fn haagerup_invariants(h: &CMatrix, phase_quantum: f64) -> Result<InvariantSet, HadamardError> {
    if !is_hadamard(h, DEFAULT_TOL) {
        return Err(HadamardError::InputNotHadamard);
    }
    let n = h.order();
    let mut set = InvariantSet::new(phase_quantum);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                let a = h[(i, j)] * h[(k, j)].conj();
                for l in 0..n {
                    set.insert_phase((a * h[(k, l)] * h[(i, l)].conj()).arg());
                }
            }
        }
    }
    Ok(set)
}

/// Invariants of the Fourier matrix in exact arithmetic: the value for
/// `(i,j,k,l)` is `exp(2πi (i-k)(j-l) / n)`, keyed by the residue in
/// `(-n/2, n/2]` with quantum `2π/n`.
pub fn fourier_invariants_exact(n: usize) -> InvariantSet {
    let mut set = InvariantSet::new(2.0 * PI / n as f64);
    let half = n as i64 / 2;
    for d1 in 0..n {
        for d2 in 0..n {
            // each residue pair (i-k, j-l) is hit by n·n index tuples
            let mut r = ((d1 * d2) % n) as i64;
            if r > half {
                r -= n as i64;
            }
            for _ in 0..n * n {
                set.insert_key(r);
            }
        }
    }
    set
}
