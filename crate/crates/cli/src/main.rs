//! `rankone-lab`: runs one experiment from a TOML config and writes CSV and
//! JSON reports plus a manifest of their digests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod geometry;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::ConfigError;
use output::OutDir;

#[derive(Parser)]
#[command(name = "rankone-lab", version, about = "Experiments on rank-one model spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sampled identities of the model spaces and the counterexample configurations
    GeometryCheck(Args),
    /// Orbit ball, counting curve and critical exponent
    Orbit(Args),
    /// Patterson-Sullivan measure, conformality and current
    Measures(Args),
    /// Counting asymptotics, mixing and equidistribution
    Dynamics(Args),
}

#[derive(Clone, clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, short)]
    verbose: bool,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GeometryCheck(_) => "geometry-check",
            Command::Orbit(_) => "orbit",
            Command::Measures(_) => "measures",
            Command::Dynamics(_) => "dynamics",
        }
    }

    fn args(&self) -> &Args {
        match self {
            Command::GeometryCheck(a) | Command::Orbit(a) | Command::Measures(a) | Command::Dynamics(a) => a,
        }
    }
}

fn exit_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Success => 0,
        Outcome::BudgetPartial => 3,
        Outcome::BandFailure => 4,
    }
}

fn error_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.downcast_ref::<ConfigError>().is_some()) {
        return 2;
    }
    match err.downcast_ref::<rankone_core::Error>() {
        Some(rankone_core::Error::BudgetExceeded { .. }) => 3,
        _ => 1,
    }
}

fn run(command: &Command, out: &mut OutDir, cfg: &config::ExperimentConfig) -> anyhow::Result<Outcome> {
    let setup = cfg.resolve()?;
    match command {
        Command::GeometryCheck(_) => {
            let report = geometry::run(cfg, &setup)?;
            for c in &report.checks {
                println!("{}", c.line());
            }
            out.rows("checks", report.checks.len());
            out.json("geometry_check.json", &report)?;
            Ok(Outcome::from_checks(&report.checks))
        }
        Command::Orbit(_) => commands::orbit(cfg, &setup, out),
        Command::Measures(_) => commands::measures(cfg, &setup, out),
        Command::Dynamics(_) => commands::dynamics(cfg, &setup, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args().clone();
    env_logger::Builder::new()
        .filter_level(if args.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn })
        .parse_env("RANKONE_LAB_LOG")
        .init();

    if let Ok(v) = std::env::var("RANKONE_LAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            _ => {
                eprintln!("error: RANKONE_LAB_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }

    let mut out = match OutDir::create(&args.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let (code, config_bytes) = match config::load(&args.config) {
        Err(e) => {
            eprintln!("error: {e:#}");
            (error_code(&e), std::fs::read(&args.config).unwrap_or_default())
        }
        Ok((cfg, bytes)) => {
            let code = match run(&cli.command, &mut out, &cfg) {
                Ok(outcome) => exit_code(outcome),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    error_code(&e)
                }
            };
            (code, bytes)
        }
    };
    if let Err(e) = out.finish(cli.command.name(), &config_bytes, code) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
