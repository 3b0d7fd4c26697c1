//! Command-line surface for the repeater key-rate library.
//!
//! Four subcommands, all emitting CSV with a leading `#` metadata line:
//! `keyrate` evaluates a single parameter point, `sweep` varies one
//! parameter over a grid, `mc` runs the Monte Carlo waiting-time simulation
//! against the matching formula, and `analytic` tabulates the closed-form
//! secret fractions and their parameter sensitivities.
//!
//! Exit codes: 0 on success, 2 on domain errors (the message names the
//! offending flag), 3 on internal invariant violations.

use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qrkey::analytic;
use qrkey::keyrate::{self, HardwareParams, RateRecord, RepeaterConfig, Setup};
use qrkey::oracle::{self, SwapStrategy};
use qrkey::rates;
use qrkey::Error;

const EXIT_DOMAIN: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "qrkey", version, about = "Secret key rates for nested quantum repeaters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter point and print a single CSV row.
    Keyrate(KeyrateArgs),
    /// Sweep one parameter over a grid and emit a CSV table.
    Sweep(SweepArgs),
    /// Monte Carlo waiting-time estimate against the matching formula.
    Mc(McArgs),
    /// Closed-form secret fractions and sensitivities for pure sources.
    Analytic(AnalyticArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetupArg {
    Oqr,
    Hqr,
}

impl From<SetupArg> for Setup {
    fn from(s: SetupArg) -> Self {
        match s {
            SetupArg::Oqr => Setup::Oqr,
            SetupArg::Hqr => Setup::Hqr,
        }
    }
}

#[derive(Args, Clone)]
struct PointArgs {
    /// Repeater realization.
    #[arg(long, value_enum)]
    setup: SetupArg,
    /// Total distance between the end stations in km.
    #[arg(long = "L", allow_hyphen_values = true)]
    l_total: f64,
    /// Nesting levels (2^n segments).
    #[arg(long)]
    n: u32,
    /// Distillation rounds before the first swap.
    #[arg(long)]
    k: u32,
    /// Gate quality.
    #[arg(long, allow_hyphen_values = true)]
    pg: f64,
    /// Detector efficiency.
    #[arg(long, allow_hyphen_values = true)]
    eta: f64,
    /// Initial source fidelity.
    #[arg(long, allow_hyphen_values = true)]
    f0: f64,
    /// Fiber attenuation in dB/km.
    #[arg(long, default_value_t = keyrate::DEFAULT_ALPHA_DB_PER_KM)]
    alpha: f64,
    /// Signal speed in the fiber in m/s.
    #[arg(long = "c", default_value_t = keyrate::DEFAULT_C_FIBER_M_PER_S)]
    c_fiber: f64,
}

#[derive(Args)]
struct KeyrateArgs {
    #[command(flatten)]
    point: PointArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepVar {
    F0,
    Pg,
    Eta,
    L,
    N,
    K,
}

impl SweepVar {
    fn name(self) -> &'static str {
        match self {
            SweepVar::F0 => "f0",
            SweepVar::Pg => "pg",
            SweepVar::Eta => "eta",
            SweepVar::L => "L",
            SweepVar::N => "n",
            SweepVar::K => "k",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepVar::N | SweepVar::K)
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Parameter to vary.
    #[arg(long, value_enum)]
    var: SweepVar,
    #[arg(long, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, allow_hyphen_values = true)]
    to: f64,
    /// Number of grid points (integer parameters need steps = to − from + 1).
    #[arg(long)]
    steps: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[command(flatten)]
    point: PointArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Waitall,
    Immediate,
}

#[derive(Args)]
struct McArgs {
    /// Per-attempt success probability of one segment.
    #[arg(long, allow_hyphen_values = true)]
    p0: f64,
    /// Nesting levels.
    #[arg(long)]
    n: u32,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Swap success probability per level; one value broadcasts, none means
    /// deterministic swapping.
    #[arg(long = "pes")]
    p_es: Vec<f64>,
}

#[derive(Args)]
struct AnalyticArgs {
    /// Gate-quality grid "from:to:steps" (needs --eta and --n).
    #[arg(long = "pg-range", conflicts_with = "n_range")]
    pg_range: Option<String>,
    /// Nesting-level grid "from:to" (needs --pg and --eta).
    #[arg(long = "n-range")]
    n_range: Option<String>,
    #[arg(long)]
    pg: Option<f64>,
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    n: Option<u32>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keyrate(args) => cmd_keyrate(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Mc(args) => cmd_mc(&args),
        Command::Analytic(args) => cmd_analytic(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

enum CliError {
    Domain(String),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match &e {
            Error::Domain { name, .. } => CliError::Domain(format!("{} ({e})", flag_hint(name))),
            Error::NegativeCoefficient { .. } | Error::Unnormalized { .. } => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(format!("--out ({e})"))
    }
}

/// Maps a parameter name from the library to the most likely flag spelling.
fn flag_hint(name: &str) -> &'static str {
    match name {
        "f0" => "--f0",
        "p_g" | "p_c" => "--pg",
        "eta_d" => "--eta",
        "l_total" => "--L",
        "l0" => "--L (per-segment length L/2^n)",
        "alpha" => "--alpha",
        "c_fiber" => "--c",
        "n" => "--n",
        "k" => "--k",
        "p0" => "--p0",
        "p_es" | "p_es.len" => "--pes",
        "trials" => "--trials",
        "eta_t" | "eta_t*(2*eta_d-1)" => "--L/--alpha/--eta (derived transmittivity)",
        "p" | "p_l0" => "--L/--n (derived link probability)",
        "x" => "--pg/--eta (artanh argument)",
        "eta_d^2 * p_g^n_bar" => "--pg/--eta/--n (CHSH violation condition)",
        _ => "parameter",
    }
}

fn point_inputs(p: &PointArgs) -> Result<(RepeaterConfig, HardwareParams), CliError> {
    if p.setup == SetupArg::Hqr && !(0.5..=1.0).contains(&p.pg) {
        // the no-Z-error formula is only calibrated for good local
        // transmission; tighter than the library domain (0, 1]
        return Err(CliError::Domain(format!(
            "--pg ({} outside [0.5, 1] for the hybrid setup)",
            p.pg
        )));
    }
    let config = RepeaterConfig::new(p.setup.into(), p.l_total, p.n, p.k)?;
    let hw = HardwareParams::with_fiber(p.pg, p.eta, p.f0, p.alpha, p.c_fiber)?;
    Ok((config, hw))
}

const RECORD_HEADER: &str = "rate_rep,q_x,q_z,q_z_di,s,r_dd,r_di,key_dd,key_di,f_final";

fn record_fields(rec: &RateRecord) -> [f64; 10] {
    [
        rec.rate_rep,
        rec.q_x,
        rec.q_z,
        rec.q_z_di,
        rec.s,
        rec.r_dd,
        rec.r_di,
        rec.key_dd,
        rec.key_di,
        rec.state_final.fidelity(),
    ]
}

fn record_row(rec: &RateRecord) -> Result<String, CliError> {
    let fields = record_fields(rec);
    if fields.iter().any(|v| v.is_nan()) {
        return Err(CliError::Internal("NaN in rate record".into()));
    }
    Ok(fields.map(|v| v.to_string()).join(","))
}

fn cmd_keyrate(args: &KeyrateArgs) -> Result<(), CliError> {
    let (config, hw) = point_inputs(&args.point)?;
    let rec = keyrate::key_rates(&config, &hw)?;
    println!("# units: L km, rates Hz; other columns dimensionless");
    println!("{RECORD_HEADER}");
    println!("{}", record_row(&rec)?);
    Ok(())
}

fn sweep_grid(args: &SweepArgs) -> Result<Vec<f64>, CliError> {
    if args.steps < 2 {
        return Err(CliError::Domain(format!(
            "--steps ({} must be at least 2)",
            args.steps
        )));
    }
    if args.var.is_integer() {
        let ok = args.from.fract() == 0.0
            && args.to.fract() == 0.0
            && args.to >= args.from
            && args.steps == (args.to - args.from) as usize + 1;
        if !ok {
            return Err(CliError::Domain(
                "--var n/k (integer sweeps need integer bounds and steps = to - from + 1)".into(),
            ));
        }
    }
    let span = args.to - args.from;
    Ok((0..args.steps)
        .map(|i| {
            if i == args.steps - 1 {
                args.to // pin the endpoint against rounding drift
            } else {
                args.from + span * i as f64 / (args.steps - 1) as f64
            }
        })
        .collect())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let grid = sweep_grid(args)?;
    let p = &args.point;
    let mut out = String::new();
    writeln!(
        out,
        "# sweep var={} setup={} L={} n={} k={} pg={} eta={} f0={} alpha={} c={} (units: km, Hz, s)",
        args.var.name(),
        if p.setup == SetupArg::Oqr { "oqr" } else { "hqr" },
        p.l_total, p.n, p.k, p.pg, p.eta, p.f0, p.alpha, p.c_fiber
    )
    .unwrap();
    writeln!(out, "{},{RECORD_HEADER},reason", args.var.name()).unwrap();

    for &value in &grid {
        let mut point = args.point.clone();
        match args.var {
            SweepVar::F0 => point.f0 = value,
            SweepVar::Pg => point.pg = value,
            SweepVar::Eta => point.eta = value,
            SweepVar::L => point.l_total = value,
            SweepVar::N => point.n = value as u32,
            SweepVar::K => point.k = value as u32,
        }
        let row = point_inputs(&point)
            .and_then(|(config, hw)| Ok(keyrate::key_rates(&config, &hw)?))
            .and_then(|rec| record_row(&rec));
        match row {
            Ok(fields) => writeln!(out, "{value},{fields},").unwrap(),
            Err(CliError::Internal(msg)) => return Err(CliError::Internal(msg)),
            // out-of-domain rows stay in the table with empty value cells
            Err(CliError::Domain(reason)) => {
                writeln!(out, "{value},,,,,,,,,,,{}", reason.replace(',', ";")).unwrap()
            }
        }
    }
    emit(args.out.as_deref(), &out)
}

fn cmd_mc(args: &McArgs) -> Result<(), CliError> {
    let p_es: Vec<f64> = match args.p_es.len() {
        0 => vec![1.0; args.n as usize],
        1 => vec![args.p_es[0]; args.n as usize],
        _ => args.p_es.clone(),
    };
    let strategy = match args.strategy {
        StrategyArg::Waitall => SwapStrategy::WaitForAll,
        StrategyArg::Immediate => SwapStrategy::ImmediateSwap,
    };
    let est = oracle::mc_repeater(args.p0, &p_es, args.n, args.trials, args.seed, strategy)?;

    // matching analytic value: exact attempt count for deterministic
    // swapping, the product-form recursion otherwise
    let formula = if p_es.iter().all(|&p| p == 1.0) {
        rates::zn(args.n, args.p0)?
    } else {
        let mut mean = 1.0 / args.p0;
        let mut p_level = args.p0;
        for &pe in &p_es {
            mean = 1.5 * rates::a_constant(p_level)? * mean / pe;
            p_level = 1.0 / mean;
        }
        mean
    };
    let ratio = est.mean_attempts / formula;
    if ratio.is_nan() {
        return Err(CliError::Internal("NaN in Monte Carlo estimate".into()));
    }
    println!(
        "# mc p0={} n={} trials={} seed={} strategy={} pes={} (attempts in units of T0)",
        args.p0,
        args.n,
        args.trials,
        args.seed,
        match args.strategy {
            StrategyArg::Waitall => "waitall",
            StrategyArg::Immediate => "immediate",
        },
        p_es.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";"),
    );
    println!("mean_attempts,std_error,formula_attempts,ratio");
    println!("{},{},{},{}", est.mean_attempts, est.std_error, formula, ratio);
    Ok(())
}

fn parse_range3(range: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = range.split(':').collect();
    let parsed = (|| -> Option<(f64, f64, usize)> {
        if parts.len() != 3 {
            return None;
        }
        Some((
            parts[0].parse().ok()?,
            parts[1].parse().ok()?,
            parts[2].parse().ok()?,
        ))
    })();
    match parsed {
        Some((a, b, s)) if s >= 2 => Ok((a, b, s)),
        _ => Err(CliError::Domain(format!(
            "--pg-range (expected from:to:steps with steps >= 2, got {range})"
        ))),
    }
}

fn parse_range2(range: &str) -> Result<(u32, u32), CliError> {
    let parts: Vec<&str> = range.split(':').collect();
    let parsed = (|| -> Option<(u32, u32)> {
        if parts.len() != 2 {
            return None;
        }
        Some((parts[0].parse().ok()?, parts[1].parse().ok()?))
    })();
    match parsed {
        Some((a, b)) if a >= 1 && b >= a => Ok((a, b)),
        _ => Err(CliError::Domain(format!(
            "--n-range (expected from:to with 1 <= from <= to, got {range})"
        ))),
    }
}

const ANALYTIC_COLUMNS: &str = "r_dd,r_di,d_eta_dd,d_pg_dd,d_n_dd,d_eta_di,d_pg_di,d_n_di,\
rel_eta_dd,rel_pg_dd,rel_n_dd,rel_eta_di,rel_pg_di,rel_n_di,reason";

fn analytic_row(eta: f64, pg: f64, n: u32) -> String {
    let (r_dd, r_di) = analytic::closed_secret_fractions(pg, eta, n);
    let (d_eta_dd, d_pg_dd, d_n_dd) = analytic::derivatives_dd(eta, pg, n);
    let dd_rel: Vec<String> = [d_eta_dd, d_pg_dd, d_n_dd]
        .iter()
        .map(|d| {
            if r_dd > 0.0 {
                (d / r_dd).to_string()
            } else {
                String::new()
            }
        })
        .collect();
    let mut reasons: Vec<&str> = Vec::new();
    if r_dd == 0.0 {
        reasons.push("vanishing DD secret fraction");
    }

    let di_part = match analytic::derivatives_di(eta, pg, n) {
        Ok((d_eta_di, d_pg_di, d_n_di)) => {
            let rel: Vec<String> = [d_eta_di, d_pg_di, d_n_di]
                .iter()
                .map(|d| {
                    if r_di > 0.0 {
                        (d / r_di).to_string()
                    } else {
                        String::new()
                    }
                })
                .collect();
            if r_di == 0.0 {
                reasons.push("vanishing DI secret fraction");
            }
            (
                r_di.to_string(),
                d_eta_di.to_string(),
                d_pg_di.to_string(),
                d_n_di.to_string(),
                rel,
            )
        }
        Err(_) => {
            reasons.push("no CHSH violation");
            (
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                vec![String::new(), String::new(), String::new()],
            )
        }
    };
    let (r_di_s, d_eta_di, d_pg_di, d_n_di, di_rel) = di_part;
    format!(
        "{r_dd},{r_di_s},{d_eta_dd},{d_pg_dd},{d_n_dd},{d_eta_di},{d_pg_di},{d_n_di},{},{},{}",
        dd_rel.join(","),
        di_rel.join(","),
        reasons.join("; ")
    )
}

fn cmd_analytic(args: &AnalyticArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.eta) {
        return Err(CliError::Domain(format!("--eta ({} outside [0, 1])", args.eta)));
    }
    let mut out = String::new();
    match (&args.pg_range, &args.n_range) {
        (Some(range), None) => {
            let n = args
                .n
                .ok_or_else(|| CliError::Domain("--n (required with --pg-range)".into()))?;
            if n == 0 {
                return Err(CliError::Domain("--n (must be at least 1)".into()));
            }
            let (from, to, steps) = parse_range3(range)?;
            for bound in [from, to] {
                if !(0.0..=1.0).contains(&bound) {
                    return Err(CliError::Domain(format!("--pg-range (bound {bound})")));
                }
            }
            writeln!(out, "# analytic var=pg eta={} n={n} (dimensionless)", args.eta).unwrap();
            writeln!(out, "pg,{ANALYTIC_COLUMNS}").unwrap();
            for i in 0..steps {
                let pg = if i == steps - 1 {
                    to
                } else {
                    from + (to - from) * i as f64 / (steps - 1) as f64
                };
                writeln!(out, "{pg},{}", analytic_row(args.eta, pg, n)).unwrap();
            }
        }
        (None, Some(range)) => {
            let pg = args
                .pg
                .ok_or_else(|| CliError::Domain("--pg (required with --n-range)".into()))?;
            if !(0.0..=1.0).contains(&pg) {
                return Err(CliError::Domain(format!("--pg ({pg} outside [0, 1])")));
            }
            let (from, to) = parse_range2(range)?;
            writeln!(out, "# analytic var=n eta={} pg={pg} (dimensionless)", args.eta).unwrap();
            writeln!(out, "n,{ANALYTIC_COLUMNS}").unwrap();
            for n in from..=to {
                writeln!(out, "{n},{}", analytic_row(args.eta, pg, n)).unwrap();
            }
        }
        _ => {
            return Err(CliError::Domain(
                "--pg-range/--n-range (exactly one must be given)".into(),
            ))
        }
    }
    emit(args.out.as_deref(), &out)
}

fn emit(path: Option<&std::path::Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}
