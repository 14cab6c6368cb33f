//! Command-line front end: `equi-szego <subcommand> --config <path>`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error,
//! 3 violated mathematical assumption.

pub mod config;
pub mod output;
pub mod runs;

use crate::Error;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

pub use config::{load, Experiment, ExperimentConfig};
pub use output::{Cell, Report, Table};
pub use runs::{
    run_decay_scan, run_diag_scan, run_dim_table, run_example, run_profile_scan, run_toeplitz, ExampleName,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "equi-szego", version, about = "Equivariant Szegő kernel experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file (default: the config's `output`, else stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Isotype dimensions against the oracle and the predicted growth.
    Dim(ConfigArg),
    /// Diagonal values against the leading term.
    Diag(ConfigArg),
    /// Off-locus decay of the diagonal.
    Decay(ConfigArg),
    /// Transversal profile of the rescaled kernel.
    Profile(ConfigArg),
    /// Toeplitz traces and near-diagonal samples.
    Toeplitz(ConfigArg),
    /// A worked example end to end.
    Example {
        #[arg(value_enum)]
        name: ExampleName,
    },
}

#[derive(Debug, clap::Args)]
pub struct ConfigArg {
    #[arg(long)]
    pub config: PathBuf,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        e if e.is_assumption_violation() => EXIT_ASSUMPTION,
        _ => EXIT_FAILURE,
    }
}

fn load_file(path: &PathBuf, seed: Option<u64>) -> crate::Result<Experiment> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut exp = load(&src)?;
    if let Some(s) = seed {
        exp.seed = s;
    }
    Ok(exp)
}

/// Runs a parsed command line, returning the report and the configured output path.
pub fn execute(cli: &Cli) -> crate::Result<(Report, Option<String>)> {
    let run = |c: &ConfigArg, f: fn(&Experiment) -> crate::Result<Report>| {
        let e = load_file(&c.config, cli.seed)?;
        Ok((f(&e)?, e.output.clone()))
    };
    match &cli.command {
        Command::Dim(c) => run(c, run_dim_table),
        Command::Diag(c) => run(c, run_diag_scan),
        Command::Decay(c) => run(c, run_decay_scan),
        Command::Profile(c) => run(c, run_profile_scan),
        Command::Toeplitz(c) => run(c, run_toeplitz),
        Command::Example { name } => Ok((run_example(*name, cli.seed.unwrap_or(0))?, None)),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let (report, cfg_out) = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = match cli.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    let out = cli.out.clone().or(cfg_out.map(PathBuf::from));
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, text) {
                eprintln!("error: writing {}: {e}", p.display());
                return EXIT_FAILURE;
            }
        }
        None => print!("{text}"),
    }
    EXIT_OK
}
