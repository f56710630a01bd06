//! `cfwp`: hypothesis checks, mode verdicts and sweeps from a JSON configuration.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Outputs;
use config::{RunConfig, WINDOW_ENV};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "cfwp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the vanishing-theorem hypotheses (exit 0 holds, 2 fails, 3 inconclusive).
    Check(Common),
    /// Classify one mode (exit 0 no-L2, 2 candidate-L2, 3 inconclusive).
    SolveMode(Common),
    /// Classify every mode of a grid.
    Sweep(Common),
    /// Run the identity suite on one mode (exit 0 when every check passes).
    Lemmas(Common),
    /// Tabulate the profiles in the coordinate `s = ∫ gamma` as CSV.
    Reparam(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Report destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for plot-ready CSV files.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    /// Worker threads for mode classification.
    #[arg(long)]
    jobs: Option<usize>,
    /// Relative tolerance of the integrator.
    #[arg(long)]
    tol: Option<f64>,
    /// Override a configuration value, e.g. `--set mode.lambda=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

type Handler = fn(&RunConfig, &Outputs) -> Result<i32, CliError>;

fn run(cli: Cli) -> Result<i32, CliError> {
    let (command, common): (Handler, Common) = match cli.command {
        Command::Check(c) => (commands::check, c),
        Command::SolveMode(c) => (commands::solve_mode, c),
        Command::Sweep(c) => (commands::sweep_modes, c),
        Command::Lemmas(c) => (commands::lemmas, c),
        Command::Reparam(c) => (commands::reparam, c),
    };
    let env_window = std::env::var(WINDOW_ENV).ok();
    let mut overrides = common.overrides.clone();
    if let Some(tol) = common.tol {
        overrides.push(format!("shoot.rel_tol={tol:e}"));
    }
    let cfg = config::load(&common.config, &overrides, env_window.as_deref())?;
    let outputs = Outputs {
        out: common.out.or_else(|| cfg.output.out.clone()),
        csv_dir: common.csv_dir.or_else(|| cfg.output.csv_dir.clone()),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    match common.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => pool = pool.num_threads(n),
        None => {}
    }
    let pool = pool.build().map_err(CliError::config)?;
    pool.install(|| command(&cfg, &outputs))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("cfwp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
