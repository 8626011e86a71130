use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use quanta_timing::cli::{
    cmd_bounds, cmd_finite_m, cmd_validate, log_grid, open_output, Command, OutputFormat,
    RunConfig, DEFAULT_CHI_MAX, DEFAULT_CHI_MIN, DEFAULT_CHI_POINTS,
};
use quanta_timing::Error;

#[derive(Parser)]
#[command(
    version,
    about = "Capacity bounds and validation for the identical-quanta timing channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-quantum and per-time capacity lower bounds over a χ grid.
    Bounds(Opts),
    /// Finite-M mutual information and per-quantum bound, one row per (M, χ).
    FiniteM(Opts),
    /// Cross-check analytic results against oracles and simulation.
    Validate(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Opts {
    #[arg(long, default_value_t = DEFAULT_CHI_MIN)]
    chi_min: f64,
    #[arg(long, default_value_t = DEFAULT_CHI_MAX)]
    chi_max: f64,
    #[arg(long, default_value_t = DEFAULT_CHI_POINTS)]
    chi_points: usize,
    /// Comma-separated quanta counts; defaults to 1, 2, 4, ..., 16384.
    #[arg(long, value_delimiter = ',')]
    m_list: Option<Vec<usize>>,
    /// Passage rate λ.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Emission rate ρ used by the epoch checks.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Guard fraction ε used by the epoch checks.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, env = "QUANTA_TIMING_SEED", default_value_t = 1)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to csv for tables and json for validate.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn config(command: Command, o: Opts) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::new(command);
    cfg.chi_grid = log_grid(o.chi_min, o.chi_max, o.chi_points)?;
    if let Some(m) = o.m_list {
        cfg.m_list = m;
    }
    cfg.lambda = o.lambda;
    cfg.rho = o.rho;
    cfg.epsilon = o.epsilon;
    cfg.samples = o.samples;
    cfg.seed = o.seed;
    cfg.out = o.out;
    if let Some(f) = o.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, Error> {
    let (command, opts) = match cli.command {
        Cmd::Bounds(o) => (Command::Bounds, o),
        Cmd::FiniteM(o) => (Command::FiniteM, o),
        Cmd::Validate(o) => (Command::Validate, o),
    };
    let cfg = config(command, opts)?;
    let mut out = open_output(&cfg)?;
    let io = |e| Error::Io {
        path: cfg.out.clone().unwrap_or_else(|| "<stdout>".into()),
        source: e,
    };
    match command {
        Command::Bounds => cmd_bounds(&cfg, &mut out)?,
        Command::FiniteM => cmd_finite_m(&cfg, &mut out)?,
        Command::Validate => {
            let report = cmd_validate(&cfg, |s| {
                eprintln!(
                    "{:<26} {}  measured={:.3e} tol={:.1e}  {:.2}s",
                    s.name,
                    if s.passed { "PASS" } else { "FAIL" },
                    s.measured,
                    s.tolerance,
                    s.elapsed.as_secs_f64()
                );
            })?;
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| io(e.into()))?;
            writeln!(out).map_err(io)?;
            out.flush().map_err(io)?;
            return Ok(report.passed);
        }
    }
    out.flush().map_err(io)?;
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::InvalidParameter { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
