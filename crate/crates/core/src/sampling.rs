//! Random bistochastic matrices and Monte Carlo volume fractions.
//!
//! All randomness comes from `ChaCha8Rng`. A run with seed `S` is split into
//! fixed-size chunks; chunk `c` draws from stream `c` of the generator seeded
//! with `S`, so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{validate_bistochastic, BistoMatrix, MatrixError, Tolerances};
use crate::unisto::{chain_conditions_with, Status};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("entry ({row}, {col}) = {value} is not positive")]
    NonPositiveInput { row: usize, col: usize, value: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplerMethod {
    /// Uniform core entries with rejection; exactly uniform on the polytope.
    CubeCore,
    /// Sinkhorn normalization of a matrix with i.i.d. uniform entries.
    SinkhornUniform,
    /// Sinkhorn normalization of a matrix with Dirichlet rows.
    SinkhornDirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub method: SamplerMethod,
    pub n: usize,
    pub seed: u64,
    pub dirichlet_s: f64,
    pub sinkhorn_tol: f64,
    pub sinkhorn_max_iter: usize,
}

pub const DEFAULT_SINKHORN_TOL: f64 = 1e-7;
pub const DEFAULT_SINKHORN_MAX_ITER: usize = 100_000;

impl SamplerConfig {
    pub fn new(method: SamplerMethod, n: usize, seed: u64) -> Self {
        Self {
            method,
            n,
            seed,
            dirichlet_s: s_star(n.max(2)),
            sinkhorn_tol: DEFAULT_SINKHORN_TOL,
            sinkhorn_max_iter: DEFAULT_SINKHORN_MAX_ITER,
        }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        if self.n < 2 {
            return Err(SamplingError::InvalidConfig(format!("order must be at least 2, got {}", self.n)));
        }
        if !(self.dirichlet_s > 0.0 && self.dirichlet_s.is_finite()) {
            return Err(SamplingError::InvalidConfig(format!("dirichlet_s must be positive, got {}", self.dirichlet_s)));
        }
        if !(self.sinkhorn_tol > 0.0 && self.sinkhorn_tol.is_finite()) {
            return Err(SamplingError::InvalidConfig(format!("sinkhorn_tol must be positive, got {}", self.sinkhorn_tol)));
        }
        Ok(())
    }
}

/// Generator for stream `stream` of seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complete_core(n: usize, core: &[f64]) -> Option<Vec<f64>> {
    let m = n - 1;
    let mut col = vec![0.0; m];
    let mut total = 0.0;
    let mut e = vec![0.0; n * n];
    for i in 0..m {
        let mut row = 0.0;
        for j in 0..m {
            let x = core[i * m + j];
            e[i * n + j] = x;
            row += x;
            col[j] += x;
        }
        if row > 1.0 {
            return None;
        }
        e[i * n + m] = 1.0 - row;
        total += row;
    }
    if col.iter().any(|&c| c > 1.0) || total < (n - 2) as f64 {
        return None;
    }
    for j in 0..m {
        e[m * n + j] = 1.0 - col[j];
    }
    e[m * n + m] = total - (n - 2) as f64;
    Some(e)
}

fn finish(n: usize, e: Vec<f64>) -> BistoMatrix {
    validate_bistochastic(n, e, &Tolerances::default()).expect("completion of an admissible core is bistochastic")
}

/// Uniform point of `{x ≥ 0, Σx ≤ 1}` in dimension `m`: i.i.d. uniform
/// entries, restarting as soon as the partial sum exceeds 1.
fn corner_simplex_row<R: Rng + ?Sized>(m: usize, rng: &mut R, out: &mut [f64]) {
    'draw: loop {
        let mut partial = 0.0;
        for x in out.iter_mut().take(m) {
            *x = rng.random();
            partial += *x;
            if partial > 1.0 {
                continue 'draw;
            }
        }
        return;
    }
}

/// One draw of the `(n-1)×(n-1)` core with row discrimination: rows are
/// independent, so a row is redrawn as soon as its partial sum exceeds 1.
/// The core is then rejected (`None`) if a column sum exceeds 1 or the total
/// is below `n - 2`.
pub fn sample_cube_core<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Option<BistoMatrix> {
    assert!(n >= 2, "order must be at least 2");
    let m = n - 1;
    let mut core = vec![0.0; m * m];
    for row in core.chunks_mut(m) {
        corner_simplex_row(m, rng, row);
    }
    complete_core(n, &core).map(|e| finish(n, e))
}

/// Same distribution as [`sample_cube_core`] without row discrimination:
/// the whole core is drawn and rejected at once.
pub fn sample_cube_core_reference<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Option<BistoMatrix> {
    assert!(n >= 2, "order must be at least 2");
    let m = n - 1;
    let core: Vec<f64> = (0..m * m).map(|_| rng.random()).collect();
    complete_core(n, &core).map(|e| finish(n, e))
}

fn sums(n: usize, e: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            rows[i] += e[i * n + j];
            cols[j] += e[i * n + j];
        }
    }
    (rows, cols)
}

fn sum_residual(n: usize, e: &[f64]) -> f64 {
    let (r, c) = sums(n, e);
    r.iter().chain(&c).map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
}

/// Alternating row and column normalization until every sum is within
/// `tol` of 1.
pub fn sinkhorn(n: usize, entries: &[f64], tol: f64, max_iter: usize) -> Result<BistoMatrix, SamplingError> {
    if n == 0 {
        return Err(MatrixError::Empty.into());
    }
    if entries.len() != n * n {
        return Err(MatrixError::NotSquare { rows: n, cols: entries.len() / n }.into());
    }
    if let Some(k) = entries.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(SamplingError::NonPositiveInput { row: k / n, col: k % n, value: entries[k] });
    }
    let mut e = entries.to_vec();
    let mut residual = sum_residual(n, &e);
    let mut it = 0;
    while residual > tol {
        if it >= max_iter {
            return Err(SamplingError::MaxIterationsExceeded { iterations: it, residual });
        }
        let (rows, _) = sums(n, &e);
        for i in 0..n {
            e[i * n..(i + 1) * n].iter_mut().for_each(|x| *x /= rows[i]);
        }
        let (_, cols) = sums(n, &e);
        for (k, x) in e.iter_mut().enumerate() {
            *x /= cols[k % n];
        }
        residual = sum_residual(n, &e);
        it += 1;
    }
    let tolerances = Tolerances { bis: tol.max(Tolerances::default().bis), ..Tolerances::default() };
    Ok(validate_bistochastic(n, e, &tolerances)?)
}

/// Dirichlet(s, ..., s) vector from normalized Gamma(s, 1) draws.
pub fn sample_dirichlet_row<R: Rng + ?Sized>(n: usize, s: f64, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(s, 1.0).expect("shape must be positive");
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let total: f64 = v.iter().sum();
        // tiny shapes can underflow every draw
        if total > 0.0 && total.is_finite() {
            v.iter_mut().for_each(|x| *x /= total);
            return v;
        }
    }
}

/// Dirichlet shape `(n² - 2 + sqrt(n⁴ - 4)) / (2n²)` for which Sinkhorn
/// normalization of Dirichlet rows is approximately uniform.
pub fn s_star(n: usize) -> f64 {
    let n2 = (n * n) as f64;
    (n2 - 2.0 + (n2 * n2 - 4.0).sqrt()) / (2.0 * n2)
}

/// One matrix; the cube-core method retries until a draw is accepted.
pub fn sample<R: Rng + ?Sized>(config: &SamplerConfig, rng: &mut R) -> Result<BistoMatrix, SamplingError> {
    config.validate()?;
    let n = config.n;
    match config.method {
        SamplerMethod::CubeCore => loop {
            if let Some(b) = sample_cube_core(n, rng) {
                return Ok(b);
            }
        },
        SamplerMethod::SinkhornUniform => {
            let e: Vec<f64> = (0..n * n).map(|_| 1.0 - rng.random::<f64>()).collect();
            sinkhorn(n, &e, config.sinkhorn_tol, config.sinkhorn_max_iter)
        }
        SamplerMethod::SinkhornDirichlet => {
            let mut e = Vec::with_capacity(n * n);
            for _ in 0..n {
                e.extend(sample_dirichlet_row(n, config.dirichlet_s, rng));
            }
            // Dirichlet rows with small shape may contain exact zeros
            if e.iter().any(|&x| x <= 0.0) {
                e.iter_mut().for_each(|x| *x = x.max(f64::MIN_POSITIVE));
            }
            sinkhorn(n, &e, config.sinkhorn_tol, config.sinkhorn_max_iter)
        }
    }
}

pub const CHUNK: usize = 1024;

/// The first `count` matrices of the deterministic stream for `config`.
pub fn sample_many(config: &SamplerConfig, count: usize) -> Result<Vec<BistoMatrix>, SamplingError> {
    config.validate()?;
    let chunks: Vec<Result<Vec<BistoMatrix>, SamplingError>> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(config.seed, c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(|_| sample(config, &mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub samples: usize,
    /// Fraction passing the chain conditions.
    pub f_c: f64,
    pub stderr_c: f64,
    /// Fraction certified unistochastic; absent without a decider.
    pub f_u: Option<f64>,
    pub stderr_u: Option<f64>,
    /// Chain-passing samples the decider left undecided.
    pub undecided: usize,
}

fn binomial_stderr(p: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    chain: usize,
    unisto: usize,
    undecided: usize,
}

/// Fractions of `samples` draws that pass the chain conditions and, when a
/// decider is given, that it certifies. The decider only sees samples that
/// pass the chain conditions.
pub fn estimate_volumes(
    samples: usize,
    config: &SamplerConfig,
    chain_tol: f64,
    decider: Option<&(dyn Fn(&BistoMatrix) -> Status + Sync)>,
) -> Result<VolumeEstimate, SamplingError> {
    config.validate()?;
    let tallies: Vec<Result<Tally, SamplingError>> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(config.seed, c as u64);
            let mut t = Tally::default();
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let b = sample(config, &mut rng)?;
                if !chain_conditions_with(&b, chain_tol).pass {
                    continue;
                }
                t.chain += 1;
                match decider.map(|d| d(&b)) {
                    Some(Status::Unistochastic) => t.unisto += 1,
                    Some(Status::Undecided) => t.undecided += 1,
                    _ => {}
                }
            }
            Ok(t)
        })
        .collect();
    let mut total = Tally::default();
    for t in tallies {
        let t = t?;
        total.chain += t.chain;
        total.unisto += t.unisto;
        total.undecided += t.undecided;
    }
    let frac = |k: usize| if samples == 0 { 0.0 } else { k as f64 / samples as f64 };
    let f_c = frac(total.chain);
    let f_u = decider.map(|_| frac(total.unisto));
    Ok(VolumeEstimate {
        samples,
        f_c,
        stderr_c: binomial_stderr(f_c, samples),
        f_u,
        stderr_u: f_u.map(|p| binomial_stderr(p, samples)),
        undecided: total.undecided,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unisto::{decide_n3, Status};
    use proptest::prelude::*;

    #[test]
    fn s_star_values() {
        assert!((s_star(2) - (2.0 + 12f64.sqrt()) / 8.0).abs() < 1e-15);
        assert!((s_star(2) - 0.6830127).abs() < 1e-7);
        assert!((s_star(4) - (14.0 + 252f64.sqrt()) / 32.0).abs() < 1e-15);
        assert!((s_star(4) - 0.93358).abs() < 1e-5);
        assert!((s_star(1000) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn cube_core_order_two_always_accepts() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            let b = sample_cube_core(2, &mut rng).unwrap();
            assert!((b.get(0, 0) - b.get(1, 1)).abs() < 1e-15);
            assert!((b.get(0, 1) - (1.0 - b.get(0, 0))).abs() < 1e-15);
        }
    }

    #[test]
    fn discrimination_only_changes_acceptance() {
        // each row survives discrimination with probability 1/m!, so the two
        // acceptance rates differ by the factor (m!)^m
        for (n, draws) in [(3usize, 40_000), (4, 400_000)] {
            let m = n - 1;
            let factor = (1..=m).product::<usize>().pow(m as u32) as f64;
            let mut r1 = stream_rng(5, 0);
            let mut r2 = stream_rng(6, 0);
            let fast = (0..draws / 20).filter(|_| sample_cube_core(n, &mut r1).is_some()).count() as f64 / (draws / 20) as f64;
            let slow = (0..draws).filter(|_| sample_cube_core_reference(n, &mut r2).is_some()).count() as f64 / draws as f64;
            let se = (slow * factor * (1.0 - slow * factor) / (draws / 20) as f64).sqrt() + factor * (slow / draws as f64).sqrt();
            assert!((fast - slow * factor).abs() < 4.0 * se, "n={n}: {fast} vs {}", slow * factor);
        }
    }

    #[test]
    fn golden_stream() {
        let cfg = SamplerConfig::new(SamplerMethod::CubeCore, 4, 7);
        let a = sample_many(&cfg, 3).unwrap();
        let b = sample_many(&cfg, 3).unwrap();
        assert_eq!(a, b);
        let first = &a[0];
        for (j, want) in GOLDEN_FIRST_ROW.iter().enumerate() {
            assert!((first.get(0, j) - want).abs() < 1e-15, "{:?}", first.row(0));
        }
    }

    const GOLDEN_FIRST_ROW: [f64; 4] = [0.6041141261178062, 0.2954070305268556, 0.07178156444662709, 0.0286972789087111];

    #[test]
    fn sinkhorn_examples() {
        let b = sinkhorn(2, &[2.0, 1.0, 1.0, 2.0], 1e-12, 1000).unwrap();
        let want = [2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0];
        for (x, w) in b.entries().iter().zip(want) {
            assert!((x - w).abs() < 1e-12);
        }
        let flat = vec![0.25; 16];
        assert_eq!(sinkhorn(4, &flat, 1e-7, 0).unwrap().entries(), &flat[..]);
        let (u, v) = ([1.0, 2.0, 3.0], [0.5, 4.0, 1.5]);
        let rank_one: Vec<f64> = (0..9).map(|k| u[k / 3] * v[k % 3]).collect();
        let w = sinkhorn(3, &rank_one, 1e-12, 1000).unwrap();
        assert!(w.entries().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-12));
        assert!(matches!(sinkhorn(2, &[1.0, 0.0, 1.0, 1.0], 1e-7, 10), Err(SamplingError::NonPositiveInput { .. })));
        assert!(matches!(
            sinkhorn(3, &[1.0, 1e6, 1.0, 1e-6, 1.0, 1e6, 1.0, 1e-6, 1.0], 1e-15, 2),
            Err(SamplingError::MaxIterationsExceeded { .. })
        ));
    }

    #[test]
    fn dirichlet_rows() {
        let mut rng = stream_rng(3, 0);
        let n = 5;
        let draws: Vec<Vec<f64>> = (0..20000).map(|_| sample_dirichlet_row(n, 1.0, &mut rng)).collect();
        for j in 0..n {
            let mean = draws.iter().map(|v| v[j]).sum::<f64>() / draws.len() as f64;
            // variance of one coordinate: (n-1)/(n²(n+1)) for s = 1
            let sigma = ((n as f64 - 1.0) / ((n * n) as f64 * (n as f64 + 1.0)) / draws.len() as f64).sqrt();
            assert!((mean - 0.2).abs() < 4.0 * sigma, "coordinate {j}: {mean}");
        }
        let var = |s: f64, rng: &mut ChaCha8Rng| {
            let v: Vec<f64> = (0..4000).map(|_| sample_dirichlet_row(3, s, rng)[0]).collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        let (v1, v2, v3) = (var(0.5, &mut rng), var(2.0, &mut rng), var(20.0, &mut rng));
        assert!(v1 > v2 && v2 > v3);
        // Var = (n-1)/(n²(ns+1)) for symmetric Dirichlet
        assert!((v3 - 2.0 / (9.0 * 61.0)).abs() < 0.15 * 2.0 / (9.0 * 61.0));
    }

    #[test]
    fn dirichlet_sinkhorn_order_seven() {
        let cfg = SamplerConfig::new(SamplerMethod::SinkhornDirichlet, 7, 11);
        for b in sample_many(&cfg, 50).unwrap() {
            let (r, c) = sums(7, b.entries());
            assert!(r.iter().chain(&c).all(|s| (s - 1.0).abs() <= 1e-7));
            assert!(b.min_entry() > 0.0);
        }
    }

    #[test]
    fn cube_core_order_seven_still_works() {
        let cfg = SamplerConfig::new(SamplerMethod::CubeCore, 7, 2);
        assert_eq!(sample_many(&cfg, 2).unwrap().len(), 2);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = SamplerConfig::new(SamplerMethod::SinkhornUniform, 4, 9);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let two = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
        let a = one.install(|| estimate_volumes(3000, &cfg, 1e-9, None).unwrap());
        let b = two.install(|| estimate_volumes(3000, &cfg, 1e-9, None).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn order_two_is_all_unistochastic() {
        let cfg = SamplerConfig::new(SamplerMethod::CubeCore, 2, 4);
        let always = |_: &BistoMatrix| Status::Unistochastic;
        let v = estimate_volumes(500, &cfg, 1e-9, Some(&always)).unwrap();
        assert_eq!((v.f_c, v.f_u), (1.0, Some(1.0)));
    }

    #[test]
    fn order_three_chain_equals_unisto() {
        let cfg = SamplerConfig::new(SamplerMethod::CubeCore, 3, 8);
        let tol = Tolerances::default();
        let d = |b: &BistoMatrix| decide_n3(b, &tol).unwrap().status;
        let v = estimate_volumes(5000, &cfg, tol.bis, Some(&d)).unwrap();
        assert_eq!(Some(v.f_c), v.f_u);
    }

    #[test]
    fn chain_fraction_grows_with_order() {
        let f = |n| estimate_volumes(10_000, &SamplerConfig::new(SamplerMethod::CubeCore, n, 21), 1e-9, None).unwrap();
        let (f4, f5, f6) = (f(4).f_c, f(5).f_c, f(6).f_c);
        assert!(f6 > f5 && f5 > f4, "{f4} {f5} {f6}");
        // order 3 sits above order 4: its chain set has relative volume 8π²/105
        let f3 = f(3);
        let exact = 8.0 * std::f64::consts::PI.powi(2) / 105.0;
        assert!((f3.f_c - exact).abs() < 4.0 * f3.stderr_c, "{} vs {exact}", f3.f_c);
        assert!(f3.f_c > f4);
    }

    /// Two-sample Kolmogorov-Smirnov statistic.
    fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn discrimination_keeps_distribution() {
        let (mut r1, mut r2) = (stream_rng(31, 0), stream_rng(32, 0));
        let take = |f: &dyn Fn(&mut ChaCha8Rng) -> Option<BistoMatrix>, rng: &mut ChaCha8Rng| {
            let mut out = Vec::new();
            while out.len() < 3000 {
                if let Some(b) = f(rng) {
                    out.push(b);
                }
            }
            out
        };
        let fast = take(&|r| sample_cube_core(4, r), &mut r1);
        let slow = take(&|r| sample_cube_core_reference(4, r), &mut r2);
        for (i, j) in [(0, 0), (1, 2), (3, 3)] {
            let d = ks(fast.iter().map(|b| b.get(i, j)).collect(), slow.iter().map(|b| b.get(i, j)).collect());
            // 1% critical value for two samples of 3000
            assert!(d < 1.63 * (2.0 / 3000f64).sqrt(), "entry ({i},{j}): D = {d}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn every_sampler_output_is_bistochastic(seed in any::<u64>(), n in 2usize..6, m in 0usize..3) {
            let method = [SamplerMethod::CubeCore, SamplerMethod::SinkhornUniform, SamplerMethod::SinkhornDirichlet][m];
            let cfg = SamplerConfig::new(method, n, seed);
            let mut rng = stream_rng(seed, 0);
            let b = sample(&cfg, &mut rng).unwrap();
            let tol = Tolerances { bis: cfg.sinkhorn_tol, ..Tolerances::default() };
            prop_assert!(validate_bistochastic(n, b.entries().to_vec(), &tol).is_ok());
        }
    }
}
