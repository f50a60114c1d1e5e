mod plane;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use birkhoff_lab::birkhoff::{cross_section, emit_figure_data, LabelCounts, PointLabel, ScanConfig};
use birkhoff_lab::entangle::{ray_basis, ray_entropy, schmidt_profile, amplitude_pairs};
use birkhoff_lab::hadamard::{
    conference_paley, fourier, fourier_invariants_exact, haagerup_invariants, is_conference, is_hadamard, is_robust,
    is_skew, paley_skew, robust_for_order,
};
use birkhoff_lab::io::{bisto_from_json, cmatrix_from_json, MatrixJson};
use birkhoff_lab::matrix::{BistoMatrix, CMatrix, Tolerances};
use birkhoff_lab::sampling::{estimate_volumes, s_star, SamplerConfig, SamplerMethod, DEFAULT_SINKHORN_TOL};
use birkhoff_lab::unisto::{
    classify_point, decide, decide_n2, decide_n3, haagerup4, ScanMode, SolverConfig, Status, DEFAULT_PHI_GRID,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

const THREADS_ENV: &str = "BIRKHOFF_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "birkhoff-lab", version, about = "Bistochastic, unistochastic and robust Hadamard matrix toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// Slack for bistochastic validation and chain conditions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_bis: f64,
    /// Accepted unitarity residual.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_unit: f64,
    /// Bisection width for phase roots.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_root: f64,
    /// Accepted modulus mismatch of certificates.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_match: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Skew,
    Conference,
    Robust,
    Fourier,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum VolumeMethod {
    Cube,
    Sinkhorn,
    Dirichlet,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Full,
    Chain,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a Hadamard or conference matrix.
    Hadamard {
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// Verify a matrix property, or decide whether a bistochastic matrix is unistochastic.
    Check {
        file: PathBuf,
        /// Check this Hadamard property instead of deciding unistochasticity.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        #[arg(long, default_value_t = DEFAULT_PHI_GRID)]
        phi_grid: usize,
        /// Same as --format.
        #[arg(long, value_enum)]
        report: Option<Format>,
        /// Exit with status 1 when the check fails.
        #[arg(long)]
        strict: bool,
    },
    /// Label a grid on a plane through the flat matrix.
    Scan {
        /// Two spanning matrices: perm:I,perm:1234 or file:a.json,file:b.json.
        #[arg(long)]
        plane: String,
        /// Order for perm: bases.
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 101)]
        res: usize,
        #[arg(long, default_value_t = 2.5)]
        range: f64,
        #[arg(long, value_enum, default_value_t = Mode::Full)]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_PHI_GRID)]
        phi_grid: usize,
    },
    /// Monte Carlo fractions of matrices passing the chain conditions and certified unistochastic.
    Volume {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = VolumeMethod::Cube)]
        method: VolumeMethod,
        /// Dirichlet shape; defaults to the value making the induced measure nearly flat.
        #[arg(long)]
        dirichlet_s: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SINKHORN_TOL)]
        sinkhorn_tol: f64,
        #[arg(long, default_value_t = DEFAULT_PHI_GRID)]
        phi_grid: usize,
    },
    /// Equi-entangled bipartite basis from a ray unitary.
    Basis {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
    },
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Verification(String),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

struct Outcome {
    body: String,
    passed: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = value.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| anyhow!("{THREADS_ENV} must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("configuring worker threads")?;
    Ok(())
}

fn tolerances(g: &GlobalArgs) -> Result<Tolerances> {
    let tol = Tolerances { bis: g.tol_bis, unit: g.tol_unit, root: g.tol_root, matching: g.tol_match };
    tol.validate()?;
    Ok(tol)
}

fn solver(tol: Tolerances, phi_grid: usize) -> Result<SolverConfig> {
    if phi_grid < 8 {
        bail!("--phi-grid must be at least 8, got {phi_grid}");
    }
    Ok(SolverConfig { tol, phi_grid })
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let g = cli.global;
    let tol = tolerances(&g)?;
    let (outcome, strict) = match cli.command {
        Command::Hadamard { order, kind } => (cmd_hadamard(order, kind, g.format)?, false),
        Command::Check { file, kind, phi_grid, report, strict } => {
            let format = report.or(g.format);
            let outcome = match kind {
                Some(kind) => cmd_check_kind(&file, kind, &tol, format)?,
                None => cmd_check_unisto(&file, solver(tol, phi_grid)?, format)?,
            };
            (outcome, strict)
        }
        Command::Scan { plane, n, res, range, mode, phi_grid } => {
            let out = g.out.as_deref().ok_or_else(|| anyhow!("scan needs --out for the CSV file"))?;
            if g.format.is_some_and(|f| f != Format::Csv) {
                return Err(anyhow!("scan writes CSV only").into());
            }
            cmd_scan(&plane, n, res, range, mode, solver(tol, phi_grid)?, g.seed, out)?;
            return Ok(());
        }
        Command::Volume { n, samples, method, dirichlet_s, sinkhorn_tol, phi_grid } => {
            let args = VolumeArgs { n, samples, method, dirichlet_s, sinkhorn_tol, seed: g.seed };
            (cmd_volume(&args, solver(tol, phi_grid)?, g.format)?, false)
        }
        Command::Basis { n, alpha } => (cmd_basis(n, alpha, &tol, g.format)?, false),
    };
    write_output(g.out.as_deref(), &outcome.body)?;
    if strict && !outcome.passed {
        return Err(Failure::Verification("check did not pass".into()));
    }
    Ok(())
}

fn write_output(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("cannot write {}", path.display())),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(body.as_bytes()).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e).context("cannot write to standard output"),
                _ => Ok(()),
            }
        }
    }
}

fn json_or_text(format: Option<Format>) -> Result<Format> {
    match format.unwrap_or(Format::Json) {
        Format::Csv => bail!("CSV output is only available for scan"),
        f => Ok(f),
    }
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn matrix_text(m: &CMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.order() {
        let row: Vec<String> = m
            .row(i)
            .iter()
            .map(|z| if z.im == 0.0 { format!("{:>8.4}", z.re) } else { format!("{:.4}{:+.4}i", z.re, z.im) })
            .collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

fn cmd_hadamard(order: usize, kind: Kind, format: Option<Format>) -> Result<Outcome> {
    let m = match kind {
        Kind::Skew => paley_skew(order)?,
        Kind::Conference => conference_paley(order)?,
        Kind::Robust => robust_for_order(order)?,
        Kind::Fourier => {
            if order == 0 {
                bail!("order must be positive");
            }
            fourier(order)
        }
    };
    let body = match json_or_text(format)? {
        Format::Json => pretty(&MatrixJson::from_cmatrix(&m)),
        _ => matrix_text(&m),
    };
    Ok(Outcome { body, passed: true })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn cmd_check_kind(path: &Path, kind: Kind, tol: &Tolerances, format: Option<Format>) -> Result<Outcome> {
    let m = cmatrix_from_json(&read(path)?).with_context(|| format!("{} is not a matrix", path.display()))?;
    let n = m.order();
    let t = tol.unit;
    let hadamard = is_hadamard(&m, t);
    let passed = match kind {
        Kind::Skew => is_skew(&m, t),
        Kind::Conference => is_conference(&m, t),
        Kind::Robust => is_robust(&m, t),
        Kind::Fourier => {
            let exact = fourier_invariants_exact(n);
            hadamard && haagerup_invariants(&m, exact.quantum()).is_ok_and(|inv| inv == exact)
        }
    };
    let report = json!({
        "kind": kind,
        "n": n,
        "pass": passed,
        "hadamard": hadamard,
        "robust": is_robust(&m, t),
        "skew": is_skew(&m, t),
        "conference": is_conference(&m, t),
    });
    let body = match json_or_text(format)? {
        Format::Json => pretty(&report),
        _ => format!("{} check on order {n}: {}\n", serde_json::to_value(kind)?.as_str().unwrap_or("?"), if passed { "pass" } else { "fail" }),
    };
    Ok(Outcome { body, passed })
}

fn cmd_check_unisto(path: &Path, config: SolverConfig, format: Option<Format>) -> Result<Outcome> {
    let b = bisto_from_json(&read(path)?, &config.tol).with_context(|| format!("{} is not a bistochastic matrix", path.display()))?;
    let v = decide(&b, &config);
    let report = json!({
        "n": b.order(),
        "status": v.status,
        "method": v.method,
        "residual": v.residual,
        "certificate": v.certificate.as_ref().map(MatrixJson::from_cmatrix),
    });
    let body = match json_or_text(format)? {
        Format::Json => pretty(&report),
        _ => {
            let mut s = format!("status: {:?}\nmethod: {:?}\nresidual: {:e}\n", v.status, v.method, v.residual);
            if let Some(u) = &v.certificate {
                s.push_str("certificate:\n");
                s.push_str(&matrix_text(u));
            }
            s
        }
    };
    Ok(Outcome { body, passed: v.status == Status::Unistochastic })
}

/// Sidecar path for label counts: `grid.csv` becomes `grid.counts.json`.
fn counts_path(out: &Path) -> PathBuf {
    out.with_extension("counts.json")
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(spec: &str, n: usize, res: usize, range: f64, mode: Mode, config: SolverConfig, seed: u64, out: &Path) -> Result<()> {
    if !(range > 0.0 && range.is_finite()) {
        bail!("--range must be positive, got {range}");
    }
    let (a, b) = plane::parse_plane(spec)?;
    let (b1, b2) = (a.resolve(n, &config.tol)?, b.resolve(n, &config.tol)?);
    if b1.order() != b2.order() {
        bail!("plane bases have orders {} and {}", b1.order(), b2.order());
    }
    let scan_mode = match mode {
        Mode::Full => ScanMode::Full,
        Mode::Chain => ScanMode::ChainOnly,
    };
    let scan = ScanConfig { resolution: res, range, tol: config.tol };
    let grid = cross_section(&b1, &b2, &scan, |m: &BistoMatrix| classify_point(m, scan_mode, &config))?;
    let header = [
        ("plane", format!("{},{}", a.label(), b.label())),
        ("n", b1.order().to_string()),
        ("resolution", res.to_string()),
        ("range", range.to_string()),
        ("mode", format!("{mode:?}").to_lowercase()),
        ("phi_grid", config.phi_grid.to_string()),
        ("tolerances", serde_json::to_string(&config.tol)?),
        ("seed", seed.to_string()),
        ("coordinates", "B = W + s(B1 - W) + t(B2 - W)".into()),
    ];
    write_output(Some(out), &emit_figure_data(&grid, &header))?;
    let counts: LabelCounts = grid.counts();
    let summary = json!({
        "plane": format!("{},{}", a.label(), b.label()),
        "resolution": res,
        "range": range,
        "counts": counts,
        "labels": PointLabel::ALL.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
    });
    write_output(Some(&counts_path(out)), &pretty(&summary))
}

struct VolumeArgs {
    n: usize,
    samples: usize,
    method: VolumeMethod,
    dirichlet_s: Option<f64>,
    sinkhorn_tol: f64,
    seed: u64,
}

fn cmd_volume(args: &VolumeArgs, solver: SolverConfig, format: Option<Format>) -> Result<Outcome> {
    let method = match args.method {
        VolumeMethod::Cube => SamplerMethod::CubeCore,
        VolumeMethod::Sinkhorn => SamplerMethod::SinkhornUniform,
        VolumeMethod::Dirichlet => SamplerMethod::SinkhornDirichlet,
    };
    let mut cfg = SamplerConfig::new(method, args.n, args.seed);
    cfg.dirichlet_s = args.dirichlet_s.unwrap_or_else(|| s_star(args.n.max(2)));
    cfg.sinkhorn_tol = args.sinkhorn_tol;
    cfg.validate()?;
    let tol = solver.tol;
    let exact = |b: &BistoMatrix| -> Status {
        let v = match b.order() {
            2 => decide_n2(b),
            3 => decide_n3(b, &tol),
            _ => haagerup4(b, &tol, solver.phi_grid),
        };
        v.map(|v| v.status).unwrap_or(Status::Undecided)
    };
    // no decision procedure above order 4, so only f_c is reported there
    let decider: Option<&(dyn Fn(&BistoMatrix) -> Status + Sync)> = if args.n <= 4 { Some(&exact) } else { None };
    let est = estimate_volumes(args.samples, &cfg, tol.bis, decider)?;
    let report = json!({
        "config": {
            "n": args.n,
            "samples": args.samples,
            "method": args.method,
            "seed": args.seed,
            "dirichlet_s": cfg.dirichlet_s,
            "sinkhorn_tol": cfg.sinkhorn_tol,
            "phi_grid": solver.phi_grid,
            "tolerances": tol,
        },
        "f_c": est.f_c,
        "stderr_c": est.stderr_c,
        "f_u": est.f_u,
        "stderr_u": est.stderr_u,
        "undecided": est.undecided,
    });
    let body = match json_or_text(format)? {
        Format::Json => pretty(&report),
        _ => {
            let mut s = format!("n={} samples={}\nf_c = {:.4} ± {:.4}\n", args.n, args.samples, est.f_c, est.stderr_c);
            match (est.f_u, est.stderr_u) {
                (Some(f), Some(e)) => {
                    let _ = writeln!(s, "f_u = {f:.4} ± {e:.4} (undecided {})", est.undecided);
                }
                _ => s.push_str("f_u not available for this order\n"),
            }
            s
        }
    };
    Ok(Outcome { body, passed: true })
}

fn cmd_basis(n: usize, alpha: f64, tol: &Tolerances, format: Option<Format>) -> Result<Outcome> {
    let basis = ray_basis(n, alpha, tol)?;
    let profile = schmidt_profile(&basis.vectors[0].amplitudes, n)?;
    let a = basis.support_weight().expect("ray basis records alpha");
    let gram = basis.gram_residual();
    let spread = basis.schmidt_spread()?;
    let vectors: Vec<_> = basis
        .vectors
        .iter()
        .map(|v| json!({ "m": v.m, "k": v.k, "amplitudes": amplitude_pairs(&v.amplitudes) }))
        .collect();
    let report = json!({
        "n": n,
        "alpha": alpha,
        "a": a,
        "outside_interpolation_range": basis.outside_interpolation_range(),
        "index_convention": "amplitudes[j*n + l] is the coefficient of |j> (x) |l>; vector (m,k) = sum_j U[m][j] |j> (x) |j+k mod n>",
        "gram_residual": gram,
        "schmidt_spread": spread,
        "schmidt": profile.lambda,
        "entropy": profile.entropy,
        "entropy_closed_form": ray_entropy(n, a),
        "vectors": vectors,
    });
    let body = match json_or_text(format)? {
        Format::Json => pretty(&report),
        _ => format!(
            "n={n} alpha={alpha} a={a}\nschmidt = {:?}\nentropy = {}\ngram residual = {gram:e}\nschmidt spread = {spread:e}\n",
            profile.lambda, profile.entropy
        ),
    };
    Ok(Outcome { body, passed: true })
}
