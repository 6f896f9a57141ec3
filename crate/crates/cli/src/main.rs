//! `gqspi` — decision-making on displacement signals from the command line.
//!
//! Subcommands: `response`, `optimize`, `scaling`, `oracle-check`,
//! `dephasing-sweep`. Outputs are deterministic machine-readable CSV/JSON
//! with the fully resolved configuration embedded; exit codes are 0 on
//! success, 1 for configuration errors, 2 for I/O errors, 3 for
//! numeric/convergence failures.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use config::{parse_degree_list, parse_f64_list, parse_pair, Format, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    fn config(msg: String) -> Self {
        CliError::Config(msg)
    }
    fn io(msg: String) -> Self {
        CliError::Io(msg)
    }
    fn numeric(msg: String) -> Self {
        CliError::Numeric(msg)
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<gqspi_core::Error> for CliError {
    fn from(e: gqspi_core::Error) -> Self {
        use gqspi_core::Error::*;
        match e {
            InvalidArgument(_) | Capacity { .. } => CliError::Config(e.to_string()),
            Consistency(_)
            | NumericRange(_)
            | Truncation { .. }
            | QuadratureNonConvergence { .. }
            | OracleNonConvergence { .. }
            | Optimization { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gqspi",
    about = "GQSP interferometry: response curves, phase-angle optimization, scaling studies, oracle cross-checks, dephasing sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the qubit response curve P(down | beta) for a saved angle set.
    Response(CommonArgs),
    /// Find phase angles minimizing a decision-error objective.
    Optimize(CommonArgs),
    /// Optimize across a list of degrees and fit the a*log(d)/d trend.
    Scaling(CommonArgs),
    /// Randomized analytic-vs-simulator cross-checks (exit 0 iff all pass).
    OracleCheck(CommonArgs),
    /// Sweep dephasing strengths and fit the damping order per beta.
    DephasingSweep(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Polynomial degree d.
    #[arg(long)]
    degree: Option<usize>,
    /// Momentum-kick strength.
    #[arg(long)]
    kappa: Option<f64>,
    /// Decision band lo:hi (repeatable).
    #[arg(long = "band", allow_hyphen_values = true)]
    bands: Vec<String>,
    /// Gaussian prior mu:sigma.
    #[arg(long, allow_hyphen_values = true)]
    prior: Option<String>,
    /// RNG seed (runs are bitwise reproducible per seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Optimizer restarts.
    #[arg(long)]
    restarts: Option<usize>,
    /// Optimizer iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Curve grid points.
    #[arg(long)]
    points: Option<usize>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Config file (`key = value` lines; emitted artifacts also work).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Angle file (theta_i = .., phi_i = .., lambda0 = ..).
    #[arg(long)]
    angles: Option<PathBuf>,
    /// Degree list, e.g. 1,3,6,9,13 or 1..5.
    #[arg(long)]
    degrees: Option<String>,
    /// Randomized trials for oracle-check.
    #[arg(long)]
    trials: Option<usize>,
    /// Dephasing strengths, e.g. 0.04,0.02,0.01,0.005.
    #[arg(long, allow_hyphen_values = true)]
    gammas: Option<String>,
    /// Signal amplitudes for dephasing-sweep.
    #[arg(long, allow_hyphen_values = true)]
    betas: Option<String>,
    /// Corrupt one coefficient before oracle-check comparisons (must fail).
    #[arg(long, default_value_t = false)]
    inject_fault: bool,
}

fn resolve(command: &str, args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(command);
    if let Some(path) = &args.config {
        cfg.load_file(path)?;
    }
    // Flags override file values; bands from flags replace file bands.
    if let Some(d) = args.degree {
        cfg.degree = Some(d);
    }
    if let Some(k) = args.kappa {
        cfg.kappa = Some(k);
    }
    if !args.bands.is_empty() {
        let mut bands = Vec::new();
        for b in &args.bands {
            bands.push(
                parse_pair(b).ok_or_else(|| CliError::config(format!("bad --band value: {b}")))?,
            );
        }
        cfg.bands = bands;
    }
    if let Some(p) = &args.prior {
        cfg.prior =
            Some(parse_pair(p).ok_or_else(|| CliError::config(format!("bad --prior value: {p}")))?);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.restarts {
        cfg.restarts = r;
    }
    if let Some(m) = args.max_iters {
        cfg.max_iters = m;
    }
    if let Some(p) = args.points {
        cfg.points = p;
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(a) = &args.angles {
        cfg.angles = Some(a.display().to_string());
    }
    if let Some(d) = &args.degrees {
        cfg.degrees =
            parse_degree_list(d).ok_or_else(|| CliError::config(format!("bad --degrees: {d}")))?;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(g) = &args.gammas {
        cfg.gammas =
            parse_f64_list(g).ok_or_else(|| CliError::config(format!("bad --gammas: {g}")))?;
    }
    if let Some(b) = &args.betas {
        cfg.betas =
            parse_f64_list(b).ok_or_else(|| CliError::config(format!("bad --betas: {b}")))?;
    }
    if args.inject_fault {
        cfg.inject_fault = true;
    }
    Ok(cfg)
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Response(a) => {
            let cfg = resolve("response", a)?;
            commands::cmd_response(&cfg, &a.out)
        }
        Command::Optimize(a) => {
            let cfg = resolve("optimize", a)?;
            commands::cmd_optimize(&cfg, &a.out)
        }
        Command::Scaling(a) => {
            let cfg = resolve("scaling", a)?;
            commands::cmd_scaling(&cfg, &a.out)
        }
        Command::OracleCheck(a) => {
            let cfg = resolve("oracle-check", a)?;
            commands::cmd_oracle_check(&cfg)
        }
        Command::DephasingSweep(a) => {
            let cfg = resolve("dephasing-sweep", a)?;
            commands::cmd_dephasing_sweep(&cfg, &a.out)
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run() {
        eprintln!("gqspi: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
