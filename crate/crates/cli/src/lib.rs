//! Command-line pipeline over `auditml-core`: data generation,
//! preprocessing, training, scoring, cross-validation and reports.
//!
//! Every subcommand writes its outputs plus a `manifest-<command>-<options>.json`
//! into the output directory. Errors print as `error[<code>]: <detail>`
//! on one line and map to exit codes 2 (usage or configuration), 3 (data)
//! and 4 (training or convergence).

pub mod commands;
pub mod config;
pub mod modelfile;
pub mod pipeline;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::{load_config, parse_config, DataSource, PipelineConfig};
pub use modelfile::{load_model, save_model, ModelFile, FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("model file format_version {found} is not supported (this build reads format_version {supported})")]
    Version { found: String, supported: u32 },
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Convergence(String),
    #[error(transparent)]
    Core(#[from] auditml_core::Error),
}

impl CliError {
    fn core_class(e: &auditml_core::Error) -> (&'static str, i32) {
        use auditml_core::Error as E;
        if e.is_training() {
            return ("training", 4);
        }
        match e {
            E::Fold { source, .. } => Self::core_class(source),
            E::Parameter(_) | E::Config(_) | E::Generation(_) | E::Plan(_) => ("config", 2),
            _ => ("data", 3),
        }
    }

    /// Short machine-readable class printed inside `error[...]`.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Version { .. } => "version",
            CliError::Corrupt(_) => "corrupt",
            CliError::Io(_) => "io",
            CliError::Convergence(_) => "convergence",
            CliError::Core(e) => Self::core_class(e).0,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Version { .. } => 2,
            CliError::Corrupt(_) | CliError::Io(_) => 3,
            CliError::Convergence(_) => 4,
            CliError::Core(e) => Self::core_class(e).1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Rf,
    Svm,
    Knn,
}

impl ModelArg {
    pub fn tag(self) -> &'static str {
        match self {
            ModelArg::Rf => "rf",
            ModelArg::Svm => "svm",
            ModelArg::Knn => "knn",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "auditml", version, about = "Audit-risk classification pipeline")]
pub struct Cli {
    /// Pipeline configuration file (key = value lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic record CSV.
    Gen,
    /// Clean and encode records into a numeric feature CSV.
    Prep {
        /// Record CSV; defaults to the configured data source.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fit a model on all records and save it.
    Train {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Score records with a saved model.
    Predict {
        /// Model file written by `train`.
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Stratified K-fold cross-validation of one model.
    Cv {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Search the SVM grid (svm.grid.C x svm.grid.gamma).
        #[arg(long)]
        grid: bool,
    },
    /// Cross-validate all three models on shared folds and rank them.
    Compare {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Gini (forest only) and permutation feature importance.
    Importance {
        #[arg(long, value_enum, default_value = "rf")]
        model: ModelArg,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Pearson correlation matrix of the record columns.
    Corr {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Aggregates behind the firm/year and firm/industry figures.
    Figures {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            eprintln!("{}", rendered.lines().skip(1).collect::<Vec<_>>().join("\n").trim());
            return 2;
        }
    };
    match commands::execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code(), e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
