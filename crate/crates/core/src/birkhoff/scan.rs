use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::{validate_bistochastic, BistoMatrix, Tolerances};

use super::{flat_matrix, BirkhoffError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointLabel {
    NotBistochastic,
    /// Bistochastic but violates a chain condition.
    Outside,
    /// Passes the chain conditions, rejected by the unistochasticity solver.
    ChainOnly,
    Unisto,
    /// Passes the chain conditions, no verdict.
    Undecided,
}

impl PointLabel {
    pub const ALL: [PointLabel; 5] =
        [Self::NotBistochastic, Self::Outside, Self::ChainOnly, Self::Unisto, Self::Undecided];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::NotBistochastic => "NotBistochastic",
            Self::Outside => "Outside",
            Self::ChainOnly => "ChainOnly",
            Self::Unisto => "Unisto",
            Self::Undecided => "Undecided",
        }
    }
}

/// Result of classifying one bistochastic point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointClass {
    pub label: PointLabel,
    pub chain_margin: Option<f64>,
    pub solver_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanPoint {
    pub s: f64,
    pub t: f64,
    pub class: PointClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub resolution: usize,
    /// Coordinates run over `[-range, range]`.
    pub range: f64,
    pub tol: Tolerances,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { resolution: 101, range: 2.5, tol: Tolerances::default() }
    }
}

impl ScanConfig {
    pub fn coordinate(&self, k: usize) -> f64 {
        if self.resolution <= 1 {
            return 0.0;
        }
        -self.range + 2.0 * self.range * k as f64 / (self.resolution - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanGrid {
    pub base1: BistoMatrix,
    pub base2: BistoMatrix,
    pub config: ScanConfig,
    /// Row-major in `t`, then `s`.
    pub points: Vec<ScanPoint>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct LabelCounts {
    pub not_bistochastic: usize,
    pub outside: usize,
    pub chain_only: usize,
    pub unisto: usize,
    pub undecided: usize,
}

impl LabelCounts {
    pub fn get(&self, label: PointLabel) -> usize {
        match label {
            PointLabel::NotBistochastic => self.not_bistochastic,
            PointLabel::Outside => self.outside,
            PointLabel::ChainOnly => self.chain_only,
            PointLabel::Unisto => self.unisto,
            PointLabel::Undecided => self.undecided,
        }
    }

    fn bump(&mut self, label: PointLabel) {
        let slot = match label {
            PointLabel::NotBistochastic => &mut self.not_bistochastic,
            PointLabel::Outside => &mut self.outside,
            PointLabel::ChainOnly => &mut self.chain_only,
            PointLabel::Unisto => &mut self.unisto,
            PointLabel::Undecided => &mut self.undecided,
        };
        *slot += 1;
    }
}

impl ScanGrid {
    pub fn counts(&self) -> LabelCounts {
        let mut c = LabelCounts::default();
        for p in &self.points {
            c.bump(p.class.label);
        }
        c
    }

    /// Matrix at plane coordinates `(s, t)`, unvalidated.
    pub fn point_entries(&self, s: f64, t: f64) -> Vec<f64> {
        plane_entries(&self.base1, &self.base2, s, t)
    }
}

fn plane_entries(b1: &BistoMatrix, b2: &BistoMatrix, s: f64, t: f64) -> Vec<f64> {
    let w = 1.0 / b1.order() as f64;
    b1.entries().iter().zip(b2.entries()).map(|(&x, &y)| w + s * (x - w) + t * (y - w)).collect()
}

/// Classifies the lattice `W + s(b1 - W) + t(b2 - W)` over the square
/// `[-range, range]²`. Points that fail validation are labelled, not dropped.
pub fn cross_section<F>(b1: &BistoMatrix, b2: &BistoMatrix, config: &ScanConfig, classify: F) -> Result<ScanGrid, BirkhoffError>
where
    F: Fn(&BistoMatrix) -> PointClass + Sync,
{
    let n = b1.order();
    if b2.order() != n {
        return Err(crate::matrix::MatrixError::OrderMismatch { left: n, right: b2.order() }.into());
    }
    let w = flat_matrix(n);
    let u: Vec<f64> = b1.entries().iter().zip(w.entries()).map(|(a, b)| a - b).collect();
    let v: Vec<f64> = b2.entries().iter().zip(w.entries()).map(|(a, b)| a - b).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (uu, vv, uv) = (dot(&u, &u), dot(&v, &v), dot(&u, &v));
    if uu < 1e-24 || vv < 1e-24 || uu * vv - uv * uv <= 1e-12 * uu * vv {
        return Err(BirkhoffError::DegeneratePlane);
    }
    let r = config.resolution;
    let points = (0..r * r)
        .into_par_iter()
        .map(|idx| {
            let (s, t) = (config.coordinate(idx % r), config.coordinate(idx / r));
            let class = match validate_bistochastic(n, plane_entries(b1, b2, s, t), &config.tol) {
                Ok(b) => classify(&b),
                Err(_) => PointClass { label: PointLabel::NotBistochastic, chain_margin: None, solver_residual: None },
            };
            ScanPoint { s, t, class }
        })
        .collect();
    Ok(ScanGrid { base1: b1.clone(), base2: b2.clone(), config: *config, points })
}

/// CSV with columns `s,t,label,chain_margin,solver_residual`, preceded by
/// `#` comment lines holding `header` entries as `key=value`.
pub fn emit_figure_data(grid: &ScanGrid, header: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str("s,t,label,chain_margin,solver_residual\n");
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    for p in &grid.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.s,
            p.t,
            p.class.label.as_str(),
            opt(p.class.chain_margin),
            opt(p.class.solver_residual)
        );
    }
    out
}
