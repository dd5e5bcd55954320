//! Command-line front end: closed-form verdicts, window enumeration, root
//! counting, crossing lists, trajectory export, and parameter sweeps. Data
//! goes to stdout (or `--out`), diagnostics to stderr.
//!
//! Exit codes: 0 stable / success, 1 unstable / runtime failure,
//! 2 excluded by hypothesis, 64 usage error.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use rayon::prelude::*;
use stabswitch_core::{
    count_rhp_roots_auto, imaginary_crossings, is_asymptotically_stable, rightmost_root,
    simulate, stability_windows, write_trajectory_csv, Coefficients, CriterionError,
    History, SimConfig, SimError, SpectrumError, Stability, SystemParams, TauWindows,
};

#[derive(Parser)]
#[command(
    name = "stabswitch",
    version,
    about = "Stability analysis for x'(t) = -a x - alpha x(t-tau) - b y, \
             y'(t) = -a y - alpha y(t-tau) - c x"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide asymptotic stability at one parameter point (JSON verdict)
    Check(CheckArgs),
    /// Enumerate the delay intervals on which the system is stable (JSON)
    Windows(WindowsArgs),
    /// Count characteristic roots with positive real part (JSON)
    Roots(PointArgs),
    /// List imaginary-axis root crossings up to --tau-max (JSON)
    Crossings(CrossingsArgs),
    /// Integrate the system and emit the trajectory as CSV
    Simulate(SimulateArgs),
    /// Evaluate the verdict over a parameter grid and emit CSV
    Sweep(SweepArgs),
}

/// Coefficient flags shared by every subcommand. Values omitted here may
/// come from `--config`; flags win when both are given.
#[derive(Args)]
struct CommonArgs {
    /// Instantaneous self-coupling coefficient
    #[arg(long, allow_hyphen_values = true, value_name = "REAL")]
    a: Option<f64>,
    /// Delayed self-coupling coefficient
    #[arg(long, allow_hyphen_values = true, value_name = "REAL")]
    alpha: Option<f64>,
    /// Cross-coupling of y into the x equation
    #[arg(long, allow_hyphen_values = true, value_name = "REAL")]
    b: Option<f64>,
    /// Cross-coupling of x into the y equation
    #[arg(long, allow_hyphen_values = true, value_name = "REAL")]
    c: Option<f64>,
    /// JSON file with the same keys as the flags (flags override it)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write output to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Delay of the retarded terms
    #[arg(long, allow_hyphen_values = true, value_name = "REAL")]
    tau: Option<f64>,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Delay of the retarded terms
    #[arg(long, allow_hyphen_values = true, value_name = "REAL")]
    tau: Option<f64>,
}

#[derive(Args)]
struct WindowsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Truncate the report at this delay and flag the truncation
    #[arg(long, value_name = "REAL")]
    tau_max: Option<f64>,
}

#[derive(Args)]
struct CrossingsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest crossing delay to report
    #[arg(long, value_name = "REAL")]
    tau_max: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Delay of the retarded terms
    #[arg(long, allow_hyphen_values = true, value_name = "REAL")]
    tau: Option<f64>,
    /// Integration step (default tau/20; must be at most tau/10)
    #[arg(long, value_name = "REAL")]
    step: Option<f64>,
    /// Final time (default 20 tau; must be at least 20 tau)
    #[arg(long, value_name = "REAL")]
    horizon: Option<f64>,
    /// Constant history value for x on [-tau, 0]
    #[arg(long, allow_hyphen_values = true, value_name = "REAL")]
    x0: Option<f64>,
    /// Constant history value for y on [-tau, 0]
    #[arg(long, allow_hyphen_values = true, value_name = "REAL")]
    y0: Option<f64>,
    /// Replace the constant history with a seeded random cubic
    #[arg(long)]
    random_history: bool,
    /// Seed for --random-history (default 0)
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Fixed delay, required unless tau is a sweep axis
    #[arg(long, allow_hyphen_values = true, value_name = "REAL")]
    tau: Option<f64>,
    /// Grid axis as name=lo:hi:count with name in {a, alpha, b, c, tau}
    #[arg(long, allow_hyphen_values = true, value_name = "NAME=LO:HI:COUNT")]
    axis1: String,
    /// Optional second axis (iterated fastest)
    #[arg(long, allow_hyphen_values = true, value_name = "NAME=LO:HI:COUNT")]
    axis2: Option<String>,
    /// Append an independent right-half-plane root count per row
    #[arg(long)]
    oracle: bool,
}

enum Failure {
    Usage(String),
    Excluded(String),
    Runtime(String),
}

impl Failure {
    fn runtime(err: impl std::fmt::Display) -> Self {
        Failure::Runtime(err.to_string())
    }
}

/// Optional parameters accepted in a `--config` file.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    a: Option<f64>,
    alpha: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    tau: Option<f64>,
    tau_max: Option<f64>,
    step: Option<f64>,
    horizon: Option<f64>,
    x0: Option<f64>,
    y0: Option<f64>,
    seed: Option<u64>,
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile, Failure> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("--config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("--config {}: {e}", path.display())))
}

fn require(value: Option<f64>, flag: &str) -> Result<f64, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("missing required parameter --{flag}")))
}

fn resolve_coefficients(args: &CommonArgs, cfg: &ConfigFile) -> Result<Coefficients, Failure> {
    Coefficients::new(
        require(args.a.or(cfg.a), "a")?,
        require(args.alpha.or(cfg.alpha), "alpha")?,
        require(args.b.or(cfg.b), "b")?,
        require(args.c.or(cfg.c), "c")?,
    )
    .map_err(|e| Failure::Usage(e.to_string()))
}

fn resolve_params(
    args: &CommonArgs,
    tau: Option<f64>,
    cfg: &ConfigFile,
) -> Result<SystemParams, Failure> {
    let coeffs = resolve_coefficients(args, cfg)?;
    coeffs
        .with_tau(require(tau.or(cfg.tau), "tau")?)
        .map_err(|e| Failure::Usage(e.to_string()))
}

/// JSON writer printing every float with 17 significant digits so output
/// diffs cleanly and round-trips exactly.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serialized JSON is UTF-8")
}

fn emit(out: &Option<PathBuf>, data: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, data)
            .map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(data.as_bytes())
            .map_err(Failure::runtime),
    }
}

fn verdict_code(status: Stability) -> u8 {
    match status {
        Stability::Stable => 0,
        Stability::Unstable => 1,
        Stability::ExcludedByHypothesis => 2,
    }
}

fn cmd_check(args: CheckArgs) -> Result<u8, Failure> {
    let cfg = load_config(&args.common.config)?;
    let params = resolve_params(&args.common, args.tau, &cfg)?;
    let verdict = is_asymptotically_stable(&params);
    emit(&args.common.out, &to_json(&verdict))?;
    Ok(verdict_code(verdict.status))
}

#[derive(Serialize)]
struct WindowsReport {
    #[serde(flatten)]
    windows: TauWindows,
    #[serde(skip_serializing_if = "Option::is_none")]
    truncated: Option<bool>,
}

fn cmd_windows(args: WindowsArgs) -> Result<u8, Failure> {
    let cfg = load_config(&args.common.config)?;
    let coeffs = resolve_coefficients(&args.common, &cfg)?;
    let full = stability_windows(&coeffs).map_err(|e| match e {
        CriterionError::ExcludedByHypothesis => Failure::Excluded(e.to_string()),
        other => Failure::runtime(other),
    })?;
    let report = match args.tau_max.or(cfg.tau_max) {
        Some(tau_max) if tau_max > 0.0 => {
            let (windows, clipped) = full.truncated(tau_max);
            WindowsReport { windows, truncated: Some(clipped) }
        }
        Some(tau_max) => {
            return Err(Failure::Usage(format!(
                "--tau-max must be positive, got {tau_max}"
            )))
        }
        None => WindowsReport { windows: full, truncated: None },
    };
    emit(&args.common.out, &to_json(&report))?;
    Ok(0)
}

#[derive(Serialize)]
struct Cartesian {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct RootsReport {
    count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rightmost: Option<Cartesian>,
}

fn cmd_roots(args: PointArgs) -> Result<u8, Failure> {
    let cfg = load_config(&args.common.config)?;
    let params = resolve_params(&args.common, args.tau, &cfg)?;
    let count = count_rhp_roots_auto(&params).map_err(|e| match e {
        SpectrumError::RootNearContour { .. } => Failure::Runtime(format!(
            "{e}; a characteristic root sits on every candidate contour -- \
             perturb tau slightly and retry"
        )),
        other => Failure::runtime(other),
    })?;
    let refined = rightmost_root(&params);
    // Suppress the estimate when the spectrum is strictly in the left
    // half-plane: it would name a root irrelevant to the verdict.
    let rightmost = match refined {
        Some(root) if count > 0 || root.re.abs() <= 1e-6 => {
            Some(Cartesian { re: root.re, im: root.im })
        }
        _ => None,
    };
    emit(&args.common.out, &to_json(&RootsReport { count, rightmost }))?;
    Ok(0)
}

fn cmd_crossings(args: CrossingsArgs) -> Result<u8, Failure> {
    let cfg = load_config(&args.common.config)?;
    let coeffs = resolve_coefficients(&args.common, &cfg)?;
    let tau_max = require(args.tau_max.or(cfg.tau_max), "tau-max")?;
    if tau_max <= 0.0 {
        return Err(Failure::Usage(format!(
            "--tau-max must be positive, got {tau_max}"
        )));
    }
    let crossings = imaginary_crossings(&coeffs, tau_max).map_err(Failure::runtime)?;
    emit(&args.common.out, &to_json(&crossings))?;
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8, Failure> {
    let cfg = load_config(&args.common.config)?;
    let params = resolve_params(&args.common, args.tau, &cfg)?;
    let history = if args.random_history {
        let seed = args.seed.or(cfg.seed).unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut poly = || {
            let mut coeffs = [0.0; 4];
            for v in &mut coeffs {
                *v = rng.gen_range(-1.0..=1.0);
            }
            coeffs
        };
        History::Cubic { x: poly(), y: poly() }
    } else {
        History::Constant {
            x: args.x0.or(cfg.x0).unwrap_or(1.0),
            y: args.y0.or(cfg.y0).unwrap_or(0.0),
        }
    };
    let config = SimConfig {
        step: args.step.or(cfg.step).unwrap_or(params.tau / 20.0),
        horizon: args.horizon.or(cfg.horizon).unwrap_or(20.0 * params.tau),
        history,
    };
    let trajectory = simulate(&params, &config).map_err(|e| match e {
        SimError::BadStep { .. } | SimError::BadHorizon { .. } => Failure::Usage(e.to_string()),
        other => Failure::runtime(other),
    })?;
    let mut csv = Vec::new();
    write_trajectory_csv(&trajectory, &mut csv).map_err(Failure::runtime)?;
    emit(
        &args.common.out,
        &String::from_utf8(csv).expect("CSV is UTF-8"),
    )?;
    Ok(0)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Param {
    A,
    Alpha,
    B,
    C,
    Tau,
}

struct Axis {
    name: Param,
    values: Vec<f64>,
}

/// `name=lo:hi:count`. Delay axes starting at or below zero use the
/// half-open grid `(lo, hi]` so every point has a positive delay; all other
/// axes sample `[lo, hi]` inclusively.
fn parse_axis(spec: &str) -> Result<Axis, Failure> {
    let usage = || {
        Failure::Usage(format!(
            "axis '{spec}' must look like name=lo:hi:count with name in a, alpha, b, c, tau"
        ))
    };
    let (name, range) = spec.split_once('=').ok_or_else(usage)?;
    let name = match name {
        "a" => Param::A,
        "alpha" => Param::Alpha,
        "b" => Param::B,
        "c" => Param::C,
        "tau" => Param::Tau,
        _ => return Err(usage()),
    };
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(usage());
    };
    let lo: f64 = lo.parse().map_err(|_| usage())?;
    let hi: f64 = hi.parse().map_err(|_| usage())?;
    let count: usize = count.parse().map_err(|_| usage())?;
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(Failure::Usage(format!(
            "axis '{spec}' needs a finite range with hi > lo"
        )));
    }
    if count < 2 {
        return Err(Failure::Usage(format!("axis '{spec}' needs count >= 2")));
    }
    if name == Param::Tau && lo < 0.0 {
        return Err(Failure::Usage(format!(
            "axis '{spec}': delay ranges must start at or above 0"
        )));
    }
    let span = hi - lo;
    let values = if name == Param::Tau && lo <= 0.0 {
        (1..=count).map(|i| lo + span * i as f64 / count as f64).collect()
    } else {
        (0..count)
            .map(|i| lo + span * i as f64 / (count - 1) as f64)
            .collect()
    };
    Ok(Axis { name, values })
}

#[derive(Clone, Copy)]
struct Point {
    a: Option<f64>,
    alpha: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    tau: Option<f64>,
}

impl Point {
    fn set(&mut self, param: Param, value: f64) {
        match param {
            Param::A => self.a = Some(value),
            Param::Alpha => self.alpha = Some(value),
            Param::B => self.b = Some(value),
            Param::C => self.c = Some(value),
            Param::Tau => self.tau = Some(value),
        }
    }

    fn params(&self) -> Result<SystemParams, Failure> {
        SystemParams::new(
            require(self.a, "a")?,
            require(self.alpha, "alpha")?,
            require(self.b, "b")?,
            require(self.c, "c")?,
            require(self.tau, "tau")?,
        )
        .map_err(|e| Failure::Usage(e.to_string()))
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Failure> {
    let cfg = load_config(&args.common.config)?;
    let axis1 = parse_axis(&args.axis1)?;
    let axis2 = args.axis2.as_deref().map(parse_axis).transpose()?;
    if let Some(axis2) = &axis2 {
        if axis2.name == axis1.name {
            return Err(Failure::Usage(
                "sweep axes must name distinct parameters".into(),
            ));
        }
    }
    let base = Point {
        a: args.common.a.or(cfg.a),
        alpha: args.common.alpha.or(cfg.alpha),
        b: args.common.b.or(cfg.b),
        c: args.common.c.or(cfg.c),
        tau: args.tau.or(cfg.tau),
    };

    let mut grid = Vec::new();
    for &v1 in &axis1.values {
        let mut point = base;
        point.set(axis1.name, v1);
        match &axis2 {
            Some(axis2) => {
                for &v2 in &axis2.values {
                    let mut inner = point;
                    inner.set(axis2.name, v2);
                    grid.push(inner.params()?);
                }
            }
            None => grid.push(point.params()?),
        }
    }

    let oracle = args.oracle;
    let rows: Vec<String> = grid
        .par_iter()
        .map(|params| {
            let verdict = is_asymptotically_stable(params);
            let mut row = format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                params.a,
                params.alpha,
                params.b,
                params.c,
                params.tau,
                verdict_code(verdict.status)
            );
            if oracle {
                let count = count_rhp_roots_auto(params).map_err(|e| {
                    Failure::Runtime(format!("oracle failed at tau = {}: {e}", params.tau))
                })?;
                row.push(',');
                row.push_str(&count.to_string());
            }
            Ok(row)
        })
        .collect::<Result<_, Failure>>()?;

    let header = if oracle {
        "a,alpha,b,c,tau,verdict,rhp_roots"
    } else {
        "a,alpha,b,c,tau,verdict"
    };
    let mut csv = String::with_capacity(rows.len() * 64);
    csv.push_str(header);
    csv.push('\n');
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    emit(&args.common.out, &csv)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Cmd::Check(args) => cmd_check(args),
        Cmd::Windows(args) => cmd_windows(args),
        Cmd::Roots(args) => cmd_roots(args),
        Cmd::Crossings(args) => cmd_crossings(args),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Sweep(args) => cmd_sweep(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(64)
        }
        Err(Failure::Excluded(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
