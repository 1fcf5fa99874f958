mod config;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Task};

/// Worker-count override for the data-parallel core.
const THREADS_ENV: &str = "SCPEC_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("optimization infeasible: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Run(String),
    #[error("cannot write output: {0}")]
    Io(String),
}

impl From<scpec::Error> for CliError {
    fn from(e: scpec::Error) -> Self {
        match e {
            scpec::Error::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            // only the truth model is ever sampled
            scpec::Error::NotPhysical(_) => CliError::Config(format!("{e}; use exact mode for this truth model")),
            other => CliError::Run(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Run(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "scpec",
    version,
    about = "Learn Pauli noise, mitigate with PEC and optimize the overhead gauge on synthetic devices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a config file and write the report bundle.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "scpec-out")]
        out: PathBuf,
        /// Override the config's sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Use noise-free data and exact expectations instead of shots.
        #[arg(long)]
        exact: bool,
        /// Comma-separated task list replacing the config's.
        #[arg(long, value_delimiter = ',')]
        tasks: Option<Vec<String>>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
        scpec::par::init_workers(threads);
    }
    let Command::Run { config, out, seed, exact, tasks } = cli.command;
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.exact |= exact;
    if let Some(t) = tasks {
        cfg.tasks = t.iter().filter(|s| !s.trim().is_empty()).map(|s| s.parse::<Task>()).collect::<Result<_, _>>()?;
    }
    cfg.validate()?;
    let bundle = run::run(&cfg)?;
    for p in report::emit(&bundle, &out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
