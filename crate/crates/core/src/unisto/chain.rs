use serde::Serialize;

use crate::matrix::BistoMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Columns,
    Rows,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairMargin {
    pub kind: PairKind,
    pub k: usize,
    pub l: usize,
    /// Half the sum of the links minus the longest link.
    pub margin: f64,
}

/// Polygon inequalities for every pair of columns and every pair of rows:
/// the links `sqrt(B_mk B_ml)` must close, i.e. the longest is at most half
/// the total.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub pass: bool,
    pub worst: PairMargin,
    pub pairs: Vec<PairMargin>,
}

impl ChainReport {
    pub fn margin(&self) -> f64 {
        self.worst.margin
    }
}

fn pair_margin(n: usize, link: impl Fn(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for m in 0..n {
        let x = link(m);
        sum += x;
        max = max.max(x);
    }
    0.5 * sum - max
}

/// Evaluates all `n(n-1)` pair conditions; passes when every margin is at
/// least `-tau`.
pub fn chain_conditions_with(b: &BistoMatrix, tau: f64) -> ChainReport {
    let n = b.order();
    let s = b.sqrt_entries();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1));
    for k in 0..n {
        for l in k + 1..n {
            let margin = pair_margin(n, |m| s[m * n + k] * s[m * n + l]);
            pairs.push(PairMargin { kind: PairKind::Columns, k, l, margin });
        }
    }
    for k in 0..n {
        for l in k + 1..n {
            let margin = pair_margin(n, |m| s[k * n + m] * s[l * n + m]);
            pairs.push(PairMargin { kind: PairKind::Rows, k, l, margin });
        }
    }
    let worst = pairs
        .iter()
        .copied()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .unwrap_or(PairMargin { kind: PairKind::Columns, k: 0, l: 0, margin: 0.0 });
    ChainReport { pass: worst.margin >= -tau, worst, pairs }
}

/// [`chain_conditions_with`] at the default bistochastic slack.
pub fn chain_conditions(b: &BistoMatrix) -> ChainReport {
    chain_conditions_with(b, crate::matrix::Tolerances::default().bis)
}
