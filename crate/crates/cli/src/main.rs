//! Configuration-driven front end: condition checks, norm computations,
//! embedding studies, operator validation and the deflated solver, all
//! emitting machine-readable reports.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage / configuration /
//! precondition errors.

mod commands;
mod config;
mod expr;

use clap::{Parser, Subcommand};
use commands::CmdOutcome;
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "foslab",
    about = "Numerical laboratory for fractional Orlicz-Sobolev analysis"
)]
struct Cli {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Points per axis (overrides the config)
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// N-function analysis: indices, growth conditions, Sobolev conjugate
    Nfun,
    /// Run the full inequality suite; exit 1 if any check fails
    Verify,
    /// Embedding-constant studies on the configured grid
    Embed,
    /// Pointwise-vs-weak operator consistency
    Operator,
    /// Deflated multi-solution search (lambda = 1)
    Solve,
    /// Subspace tail constants and fountain diagnostics
    Fountain,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(CmdOutcome::Ok) => ExitCode::SUCCESS,
        Ok(CmdOutcome::CheckFailed(names)) => {
            eprintln!("checks failed: {}", names.join(", "));
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<CmdOutcome> {
    let config_path = cli
        .config
        .ok_or_else(|| anyhow::anyhow!("usage: --config PATH is required"))?;
    let (mut config, hash) = RunConfig::load(&config_path)?;
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(n) = cli.grid_n {
        config.domain.n = n;
        if let Some(outer) = config.outer.as_mut() {
            outer.n = n;
        }
    }
    let base = config_path
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let resolved = config.resolve(hash, &base)?;
    match cli.command {
        Command::Nfun => commands::cmd_nfun(&resolved),
        Command::Verify => commands::cmd_verify(&resolved),
        Command::Embed => commands::cmd_embed(&resolved),
        Command::Operator => commands::cmd_operator(&resolved),
        Command::Solve => commands::cmd_solve(&resolved),
        Command::Fountain => commands::cmd_fountain(&resolved),
    }
}
