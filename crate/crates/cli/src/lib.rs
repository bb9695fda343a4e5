//! Batch front end: `crdlab <solve|sweep|audit|code|certify> [flags]`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
//! Artifacts carry no timestamps and every float is rounded to 12 significant
//! digits, so identical invocations write identical bytes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use crdlab_core::coder::evaluate;
use crdlab_core::gauss::{
    markov_order, stationary_causal_certificate, CovarianceMatrix, JointProcessModel, LinearChannelSpec,
    DEFAULT_TOL,
};
use crdlab_core::report::{fmt_sig, round_sig, AuditReport};
use crdlab_core::solver::{convergence_report, rd_sweep, sweep_csv, SolverOptions};
use crdlab_core::suites::run_suite;
use crdlab_core::{ArSourceModel, Error};
use serde::Serialize;
use serde_json::{json, Value};

pub const THREADS_ENV: &str = "CRDLAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "crdlab", version, about = "Causal rate-distortion laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stationary and finite-horizon causal IRDF at one distortion.
    Solve(SolveArgs),
    /// R(D) table over a list of distortions (CSV, or JSON for a .json --out).
    Sweep(SweepArgs),
    /// Run an invariant suite: gauss, constructions, solver, coder or all.
    Audit(AuditArgs),
    /// Simulate the dithered predictive coder and emit bitstream statistics.
    Code(CodeArgs),
    /// Geometric-autocovariance certificate for a joint model.
    Certify(CertifyArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    distortion: f64,
    /// Comma-separated increasing horizons.
    #[arg(long, default_value = "4,16,64,256,1024")]
    horizon: String,
    /// Required final gap; omitted means only monotonicity is checked.
    #[arg(long)]
    tol: Option<f64>,
    /// DP grid points.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated distortions.
    #[arg(long)]
    distortion: String,
    #[arg(long, default_value_t = 256)]
    horizon: usize,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CodeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    distortion: f64,
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Horizon of the probe pair built from an AR model.
    #[arg(long, default_value_t = 6)]
    horizon: usize,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Model file contents: an AR source or a joint covariance over
/// `x(1..n), y(1..n)`.
#[derive(Debug, Clone)]
pub enum ModelFile {
    Ar(ArSourceModel),
    Covariance(CovarianceMatrix),
}

pub fn load_model(path: &Path) -> anyhow::Result<ModelFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing model {}", path.display()))?;
    if v.get("type").is_some() {
        Ok(ModelFile::Ar(serde_json::from_value(v).with_context(|| format!("AR model {}", path.display()))?))
    } else {
        Ok(ModelFile::Covariance(
            serde_json::from_value(v).with_context(|| format!("covariance model {}", path.display()))?,
        ))
    }
}

fn load_ar(path: &Path) -> anyhow::Result<ArSourceModel> {
    match load_model(path)? {
        ModelFile::Ar(m) => Ok(m),
        ModelFile::Covariance(_) => bail!("{} holds a covariance; this command needs an AR source", path.display()),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> anyhow::Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| anyhow::anyhow!("bad {what} value {t:?}")))
        .collect()
}

fn solver_options(grid: Option<usize>) -> anyhow::Result<SolverOptions> {
    let mut opts = SolverOptions::default();
    if let Some(g) = grid {
        if g < 16 {
            bail!("--grid must be at least 16");
        }
        opts.grid_points = g;
    }
    Ok(opts)
}

fn positive(x: f64, flag: &str) -> anyhow::Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        bail!("{flag} must be positive and finite, got {x}")
    }
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            serde_json::Number::from_f64(round_sig(n.as_f64().unwrap_or(0.0))).map_or(Value::Null, Value::Number)
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(round_json).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, x)| (k, round_json(x))).collect()),
        other => other,
    }
}

fn to_json<T: Serialize>(x: &T) -> anyhow::Result<String> {
    let v = round_json(serde_json::to_value(x)?);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn emit(out: Option<&Path>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn report_failures(reports: &[&AuditReport]) -> bool {
    let mut ok = true;
    for r in reports {
        for c in r.failures() {
            ok = false;
            eprintln!(
                "FAIL {}: {} (lhs {}, rhs {}, slack {})",
                r.suite,
                c.check,
                fmt_sig(c.lhs),
                fmt_sig(c.rhs),
                fmt_sig(c.slack)
            );
        }
    }
    ok
}

enum Outcome {
    Ok,
    ChecksFailed,
}

fn solve(a: SolveArgs) -> anyhow::Result<Outcome> {
    let model = load_ar(&a.model)?;
    let d = positive(a.distortion, "--distortion")?;
    let horizons: Vec<usize> = parse_list(&a.horizon, "--horizon")?;
    let tol = match a.tol {
        Some(t) => positive(t, "--tol")?,
        None => f64::INFINITY,
    };
    let rep = convergence_report(&model, d, &horizons, tol, &solver_options(a.grid)?)?;
    match &a.out {
        Some(p) => emit(Some(p), &to_json(&rep)?)?,
        None => {
            let mut s = format!("D = {}\nR_stationary_bits = {}\n", fmt_sig(d), fmt_sig(rep.stationary_bits));
            s.push_str("horizon,R_finite_bits,gap_bits\n");
            for r in &rep.rows {
                s.push_str(&format!("{},{},{}\n", r.horizon, fmt_sig(r.rate_bits), fmt_sig(r.gap_bits)));
            }
            emit(None, &s)?;
        }
    }
    Ok(if report_failures(&[&rep.report]) { Outcome::Ok } else { Outcome::ChecksFailed })
}

fn sweep(a: SweepArgs) -> anyhow::Result<Outcome> {
    let model = load_ar(&a.model)?;
    let ds: Vec<f64> = parse_list(&a.distortion, "--distortion")?;
    for d in &ds {
        positive(*d, "--distortion")?;
    }
    let rep = rd_sweep(&model, &ds, a.horizon, &solver_options(a.grid)?)?;
    let json_out = a.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let body = if json_out { to_json(&rep)? } else { sweep_csv(&rep.rows) };
    emit(a.out.as_deref(), &body)?;
    Ok(if report_failures(&[&rep.report]) { Outcome::Ok } else { Outcome::ChecksFailed })
}

fn audit(a: AuditArgs) -> anyhow::Result<Outcome> {
    let reports = run_suite(&a.suite, a.seed)?;
    emit(a.out.as_deref(), &to_json(&reports)?)?;
    let refs: Vec<&AuditReport> = reports.iter().collect();
    Ok(if report_failures(&refs) { Outcome::Ok } else { Outcome::ChecksFailed })
}

fn code(a: CodeArgs) -> anyhow::Result<Outcome> {
    let model = load_ar(&a.model)?;
    let d = positive(a.distortion, "--distortion")?;
    let ev = evaluate(&model, d, a.samples, a.seed)?;
    emit(a.out.as_deref(), &to_json(&ev)?)?;
    Ok(if report_failures(&[&ev.report]) { Outcome::Ok } else { Outcome::ChecksFailed })
}

/// Causal probe channel applied to an AR source: `y(k) = x(k) + 0.6 x(k-1) + v(k)`, `var v = 0.1`.
const PROBE_TAPS: [(isize, f64); 2] = [(0, 1.0), (1, 0.6)];
const PROBE_NOISE: f64 = 0.1;

fn certify(a: CertifyArgs) -> anyhow::Result<Outcome> {
    let tol = match a.tol {
        Some(t) => positive(t, "--tol")?,
        None => DEFAULT_TOL,
    };
    let (joint, order) = match load_model(&a.model)? {
        ModelFile::Ar(src) => {
            if a.horizon < 3 {
                bail!("--horizon must be at least 3");
            }
            let m = LinearChannelSpec::filter(a.horizon, &PROBE_TAPS, PROBE_NOISE, 0).build(&src, "probe")?;
            (m, Some(markov_order(&src, tol)?))
        }
        ModelFile::Covariance(c) => {
            if c.dim() % 2 != 0 {
                bail!("covariance dimension {} is odd; expected x(1..n), y(1..n)", c.dim());
            }
            (JointProcessModel::new(c.dim() / 2, c, "file")?, None)
        }
    };
    let body = match stationary_causal_certificate(&joint, tol) {
        Ok(cert) => json!({ "markov_order": order, "certificate": cert }),
        Err(Error::NotJointlyStationary { residual, tol }) => json!({
            "markov_order": order,
            "certificate": { "status": "not_jointly_stationary", "stationarity_residual": residual, "tol": tol },
        }),
        Err(e) => return Err(e.into()),
    };
    emit(a.out.as_deref(), &to_json(&body)?)?;
    Ok(Outcome::Ok)
}

fn dispatch(cmd: Command) -> anyhow::Result<Outcome> {
    match cmd {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Audit(a) => audit(a),
        Command::Code(a) => code(a),
        Command::Certify(a) => certify(a),
    }
}

fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(s) = std::env::var(THREADS_ENV) {
        let n: usize = s.trim().parse().ok().filter(|n| *n > 0).with_context(|| format!("{THREADS_ENV}={s:?}"))?;
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::ChecksFailed) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
