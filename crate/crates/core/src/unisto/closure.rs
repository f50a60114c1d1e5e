//! Closing polygons with prescribed side lengths.

use std::f64::consts::PI;

use crate::matrix::Complex64;

/// Links shorter than this are treated as absent.
const TINY: f64 = 1e-14;

/// Angle pairs `(θa, θb)` with `la·e^{iθa} + lb·e^{iθb} = z`.
///
/// Up to two solutions, mirror images across the direction of `z`. The
/// cosine of the opening angle may overshoot `[-1, 1]` by `slack` before the
/// closure is declared impossible.
pub(crate) fn close_two(z: Complex64, la: f64, lb: f64, slack: f64) -> ([(f64, f64); 2], usize) {
    let r = z.norm();
    let mut out = [(0.0, 0.0); 2];
    let len_tol = 1e-12_f64.max(slack);
    if la < TINY && lb < TINY {
        return (out, usize::from(r < len_tol));
    }
    if la < TINY {
        out[0] = (0.0, z.arg());
        return (out, usize::from((r - lb).abs() < len_tol));
    }
    if lb < TINY {
        out[0] = (z.arg(), 0.0);
        return (out, usize::from((r - la).abs() < len_tol));
    }
    if r < TINY {
        // the two links cancel; one representative of each orientation
        if (la - lb).abs() < len_tol {
            out = [(0.0, PI), (PI, 0.0)];
            return (out, 2);
        }
        return (out, 0);
    }
    let c = (r * r + la * la - lb * lb) / (2.0 * r * la);
    if !(-1.0 - slack..=1.0 + slack).contains(&c) {
        return (out, 0);
    }
    let gamma = c.clamp(-1.0, 1.0).acos();
    let base = z.arg();
    for (slot, sign) in out.iter_mut().zip([1.0, -1.0]) {
        let ta = base + sign * gamma;
        let tb = (z - Complex64::from_polar(la, ta)).arg();
        *slot = (ta, tb);
    }
    (out, 2)
}
