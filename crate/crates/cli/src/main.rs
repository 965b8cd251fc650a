//! `dirlab`: command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or usage,
//! 3 an audit or surrogate check failed (or a numerical resolution failure),
//! 4 a hypothesis required by the requested run does not hold.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Usage(String),
    Failed(String),
    Hypothesis(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 3,
            CliError::Hypothesis(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Usage(m) | CliError::Failed(m) | CliError::Hypothesis(m) => m,
        }
    }
}

impl From<dirlab::Error> for CliError {
    fn from(e: dirlab::Error) -> Self {
        use dirlab::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidInput(_) | E::InvalidSpec(_) | E::LevelOutOfRange { .. } => CliError::Usage(msg),
            E::HypothesisViolated(_) => CliError::Hypothesis(msg),
            E::Io(_) | E::Csv(_) => CliError::Io(msg),
            E::NonFinite { .. } | E::PrecisionMargin { .. } | E::Resolution(_) => CliError::Failed(msg),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "dirlab", version, about = "Weighted Dirichlet spaces, Cantor sets and cyclicity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Exponent α (repeatable).
    #[arg(long = "alpha", value_name = "F")]
    pub alphas: Vec<f64>,
    /// Depth of the Cantor construction or of the level used.
    #[arg(long, value_name = "N")]
    pub depth: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for randomized audits.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance of pass/fail checks.
    #[arg(long, value_name = "F")]
    pub tolerance: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Geometry tables for a Cantor set: |E_t|, N_E(t), λ_E, μ.
    Cantor(#[command(flatten)] Common),
    /// Capacity-zero test or equilibrium measure.
    Capacity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = CapacityMode::Criterion)]
        mode: CapacityMode,
    },
    /// Outer function from a weight or a modulus file, with the Γ-localization audit.
    Outer(#[command(flatten)] Common),
    /// Dirichlet-integral audits on the outer-function corpus.
    DirichletAudit(#[command(flatten)] Common),
    /// Cyclicity campaign along a δ-ladder.
    Cyclicity(#[command(flatten)] Common),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMode {
    Criterion,
    Equilibrium,
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("DIRLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("DIRLAB_THREADS={v:?} is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Cantor(c) => commands::cantor(&c),
        Command::Capacity { common, mode } => commands::capacity(&common, mode),
        Command::Outer(c) => commands::outer(&c),
        Command::DirichletAudit(c) => commands::dirichlet_audit(&c),
        Command::Cyclicity(c) => commands::cyclicity(&c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dirlab: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
