//! `switchseq`: design, evaluate and inspect antenna switching sequences.
//!
//! Exit codes: 0 success, 1 config error, 2 domain error, 3 capacity error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Domain(#[from] switchseq::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Domain(switchseq::Error::Capacity(_)) => 3,
            CliError::Domain(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "switchseq", version, about = "Antenna switching sequence design for switched-array channel sounders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ConfigArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Override a config key, e.g. `--set design.iterations=200`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design a switching sequence (FF, ambiguity baseline or Kronecker FF).
    Design(ConfigArgs),
    /// Monte Carlo comparison of sequences against the CRLB.
    Evaluate(ConfigArgs),
    /// Sample the ambiguity function of a sequence on a 1-D or 2-D sweep.
    AmbiguityMap(ConfigArgs),
    /// Fisher information diagonal and CRLB of a sequence.
    Crlb(ConfigArgs),
    /// Runtime scaling of the ambiguity and Fourier kernels.
    Bench(ConfigArgs),
}

type Pipeline = fn(&config::LoadedConfig) -> Result<(), CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, f): (&ConfigArgs, Pipeline) = match &cli.command {
        Command::Design(a) => (a, commands::design),
        Command::Evaluate(a) => (a, commands::evaluate),
        Command::AmbiguityMap(a) => (a, commands::ambiguity_map),
        Command::Crlb(a) => (a, commands::crlb),
        Command::Bench(a) => (a, commands::bench),
    };
    let cfg = config::load(&args.config, &args.overrides)?;
    f(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("switchseq: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
