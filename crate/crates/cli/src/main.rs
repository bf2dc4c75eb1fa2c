//! Config-driven experiment runner for sound-soft scattering.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 numerical or solver failure.

mod commands;
mod config;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::Config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "soft-scatter",
    version,
    about = "Scattering amplitudes of sound-soft obstacles and their span"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory.
    #[arg(long, default_value = ".", global = true)]
    out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Interior Dirichlet eigen-wavenumbers of a ball (zeros of j_l).
    Eigens,
    /// Far-field pattern for one incident direction.
    Farfield,
    /// Least-squares synthesis of a target pattern from scattering amplitudes.
    Synthesize,
    /// Synthesis residual as a function of the wavenumber.
    Sweep,
}

fn load(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    for pair in &cli.overrides {
        cfg.set(pair)?;
    }
    Ok(cfg)
}

/// Writes every file through a temporary name, then renames; on any failure
/// all files of the run are removed.
fn write_all(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let staged: Vec<(PathBuf, PathBuf)> = files
        .iter()
        .map(|(name, _)| (dir.join(format!(".{name}.partial")), dir.join(name)))
        .collect();
    let result = (|| -> io::Result<()> {
        for ((tmp, _), (_, contents)) in staged.iter().zip(files) {
            fs::write(tmp, contents)?;
        }
        for (tmp, dest) in &staged {
            fs::rename(tmp, dest)?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        for (tmp, dest) in &staged {
            let _ = fs::remove_file(tmp);
            let _ = fs::remove_file(dest);
        }
        return Err(e.into());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure {n} threads: {e}")))?;
    }
    let cfg = load(cli)?;
    let outcome = match cli.command {
        Command::Eigens => commands::eigens(cfg),
        Command::Farfield => commands::farfield(cfg),
        Command::Synthesize => commands::synthesize(cfg),
        Command::Sweep => commands::sweep(cfg),
    }?;
    write_all(&cli.out, &outcome.files)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for m in &outcome.messages {
                println!("{m}");
            }
            for (name, _) in &outcome.files {
                println!("wrote {}", cli.out.join(name).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
