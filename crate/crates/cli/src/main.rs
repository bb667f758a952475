//! `symtract`: batch front end over JSON run configurations.

mod commands;
mod config;
mod output;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Library(#[from] symtract::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(symtract::Error::Divergent(_) | symtract::Error::NoFiniteIndex(_)) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "symtract", version, about = "Spectra, complexity and tractability of (anti-)symmetric tensor product problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Information complexity n(ε,d) by every applicable method.
    Complexity(Common),
    /// n-th minimal errors e(n,d) and the initial error.
    Errors(Common),
    /// Tractability verdict for a structure schedule.
    Classify(Common),
    /// Oracle and invariant batteries.
    Verify(Common),
    /// Randomized worst-case check of the optimal algorithm.
    Simulate(Common),
    /// Symmetrizer and antisymmetrizer images of a coefficient vector.
    Project(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SYMTRACT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("SYMTRACT_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

type Runner = fn(&config::Loaded) -> Result<commands::Outcome, CliError>;

fn run(cli: Cli) -> Result<u8, CliError> {
    init_threads()?;
    let (run, common): (Runner, &Common) = match &cli.command {
        Command::Complexity(c) => (commands::complexity, c),
        Command::Errors(c) => (commands::errors, c),
        Command::Classify(c) => (commands::classify_cmd, c),
        Command::Verify(c) => (commands::verify, c),
        Command::Simulate(c) => (commands::simulate, c),
        Command::Project(c) => (commands::project, c),
    };
    let bytes = fs::read(&common.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let loaded = config::load(&bytes)?;
    let outcome = run(&loaded)?;

    let mut buf = Vec::new();
    outcome.table.write(common.format, &mut buf)?;
    match &common.out {
        Some(path) => fs::write(path, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(if outcome.failed {
        1
    } else if outcome.infinite {
        3
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("symtract: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
