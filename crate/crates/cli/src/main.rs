//! framesim: batch pipelines over frame databases and caption corpora.
//!
//! Exit codes: 0 success, 1 usage, 2 input error, 3 validation failure,
//! 4 partial failure or empty result.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use commands::{parse_summary_spec, ReportInput};
use config::{CommonFlags, FileConfig, RunConfig};
use framesim_core::corpus::Setup;
use framesim_core::stats::TTestKind;
use output::log;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Validation(usize),
    Partial(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Partial(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Input(msg) => write!(f, "input: {msg}"),
            CliError::Validation(n) => write!(f, "validation failed with {n} violation(s)"),
            CliError::Partial(msg) => write!(f, "partial failure: {msg}"),
        }
    }
}

fn parse_setup(s: &str) -> Result<Setup, String> {
    Setup::from_str(s).map_err(|_| {
        format!("unknown setup `{s}` (expected ENO, PTT, PTO, VWC or VWoC)")
    })
}

fn parse_kind(s: &str) -> Result<TTestKind, String> {
    TTestKind::from_str(s).map_err(|_| format!("unknown test kind `{s}` (student or welch)"))
}

#[derive(Parser)]
#[command(
    name = "framesim",
    about = "Frame-semantic similarity: spread activation, disambiguation, corpus statistics",
    version
)]
struct Cli {
    /// Config file (JSON); FRAMESIM_CONFIG names a default
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Suppress non-error log records on stderr
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the frame database invariants and print violations
    Validate {
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Build the per-frame relatedness table
    Table {
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Disambiguate caption records into evoked frame sets
    Parse {
        #[command(flatten)]
        flags: CommonFlags,
        /// Restrict to these setups (repeatable; default: all text setups)
        #[arg(long = "setup", value_parser = parse_setup)]
        setups: Vec<Setup>,
    },
    /// Pairwise similarities between two setups over shared images
    Compare {
        #[command(flatten)]
        flags: CommonFlags,
        /// The two setups to compare (exactly twice)
        #[arg(long = "setup", value_parser = parse_setup, required = true, num_args = 1)]
        setups: Vec<Setup>,
    },
    /// Two-sample t-test over summaries or similarity CSVs
    Report {
        #[command(flatten)]
        flags: CommonFlags,
        /// Inline summary statistics as M,S,N (repeatable)
        #[arg(long = "from-summary", value_name = "M,S,N")]
        from_summary: Vec<String>,
        /// Similarity CSV produced by `compare` (repeatable)
        #[arg(long = "from-csv", value_name = "PATH")]
        from_csv: Vec<PathBuf>,
        /// student or welch
        #[arg(long, value_parser = parse_kind, default_value = "welch")]
        kind: TTestKind,
        /// Label for the emitted report record
        #[arg(long, value_name = "NAME")]
        comparison: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config_path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os("FRAMESIM_CONFIG").map(PathBuf::from));
    let file = match &config_path {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Validate { flags } => {
            let cfg = RunConfig::resolve(&file, flags, cli.quiet)?;
            commands::cmd_validate(&cfg)
        }
        Command::Table { flags } => {
            let cfg = RunConfig::resolve(&file, flags, cli.quiet)?;
            commands::cmd_table(&cfg)
        }
        Command::Parse { flags, setups } => {
            let cfg = RunConfig::resolve(&file, flags, cli.quiet)?;
            for setup in setups {
                if !setup.is_text() {
                    return Err(CliError::Usage(format!(
                        "parse handles caption setups only, not {setup}"
                    )));
                }
            }
            commands::cmd_parse(&cfg, setups)
        }
        Command::Compare { flags, setups } => {
            let cfg = RunConfig::resolve(&file, flags, cli.quiet)?;
            let [a, b] = setups.as_slice() else {
                return Err(CliError::Usage(format!(
                    "compare needs exactly two --setup flags (got {})",
                    setups.len()
                )));
            };
            commands::cmd_compare(&cfg, *a, *b)
        }
        Command::Report {
            flags,
            from_summary,
            from_csv,
            kind,
            comparison,
        } => {
            let cfg = RunConfig::resolve(&file, flags, cli.quiet)?;
            let mut inputs = Vec::new();
            for spec in from_summary {
                inputs.push(ReportInput::Summary(
                    parse_summary_spec(spec).map_err(CliError::Usage)?,
                ));
            }
            for path in from_csv {
                inputs.push(ReportInput::Csv(path.clone()));
            }
            commands::cmd_report(&cfg, &inputs, *kind, comparison.as_deref())
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            eprint!("{err}");
            std::process::exit(1);
        }
    };
    let quiet = cli.quiet;
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            log(quiet, "error", &err.to_string());
            std::process::exit(err.exit_code());
        }
    }
}
