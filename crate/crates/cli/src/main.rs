use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;
mod settings;

/// Invalid or inconsistent configuration (exit status 1).
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: &str, reason: impl Into<String>) -> Self {
        Self { field: field.to_string(), reason: reason.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_TOLERANCE: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "relu-fim", version, about = "Fisher-information eigenfunctions of random-feature ReLU models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Each may also be set in the `--config` file
/// (same name, `key = value`); flags win.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Hidden width; `mae` and `scatter` accept a comma-separated list.
    #[arg(long)]
    pub m: Option<String>,
    /// Sample count (inputs, Monte Carlo samples or training set, per command).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated subset of G1, G2, G3diag, G3offdiag.
    #[arg(long)]
    pub groups: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
}

/// Representative member of each family (1-based).
#[derive(Args, Debug, Clone, Default)]
pub struct RepArgs {
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub gamma: Option<usize>,
    #[arg(long)]
    pub alpha: Option<usize>,
    #[arg(long)]
    pub beta: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean absolute error between X(x)ᵀv and its limit function.
    Mae {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        reps: RepArgs,
        /// Keep per-input residuals in JSON output.
        #[arg(long)]
        residuals: bool,
    },
    /// (limit, realized) pairs for plotting.
    Scatter {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        reps: RepArgs,
    },
    /// Clustered spectrum of the empirical Fisher matrix, or the basis Gram matrix.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// `spectrum` (explicit matrix) or `gram` (matrix-free basis inner products).
        #[arg(long)]
        report: Option<String>,
        /// Largest width for the explicit matrix.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Gradient descent on the output layer with basis projections.
    Dynamics(commands::DynamicsArgs),
    /// Closed forms against quadrature and Monte Carlo.
    Oracle(commands::OracleArgs),
}

fn classify(err: &anyhow::Error) -> u8 {
    use relu_fim::Error as E;
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::InvalidConfig { .. }
            | E::InvalidDimension(_)
            | E::IndexOutOfRange { .. }
            | E::ExplicitModeRefused { .. }
            | E::TooFewSamples { .. },
        ) => EXIT_CONFIG,
        _ => EXIT_INTERNAL,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Mae { common, reps, residuals } => commands::mae(&common, &reps, residuals),
        Command::Scatter { common, reps } => commands::scatter(&common, &reps),
        Command::Spectrum { common, report, cap } => commands::spectrum(&common, report, cap),
        Command::Dynamics(args) => commands::dynamics(&args),
        Command::Oracle(args) => commands::oracle(&args),
    };
    match result {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("{} row(s) outside tolerance:", failures.len());
            for f in failures {
                eprintln!("  {f}");
            }
            ExitCode::from(EXIT_TOLERANCE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}
