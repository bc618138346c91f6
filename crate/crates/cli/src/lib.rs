//! Command-line front end: argument parsing, configuration, table caching and
//! report files.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use hecke_moments::lattice::PolynomialKind;
use hecke_moments::moments::Method;

pub mod commands;
pub mod config;

pub use config::{GlobalArgs, OutFormat, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] hecke_moments::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use hecke_moments::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::InvalidArgument(_)) => EXIT_USAGE,
            CliError::Core(E::ResourceLimit { .. }) => EXIT_RESOURCE,
            _ => EXIT_VERIFY,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hecke-moments", version, about = "Power moments of Hecke eigenvalues over quaternary polynomial values")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyTarget {
    Hecke,
    Deligne,
    Chebyshev,
    Repidentity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Sieve,
    Lattice,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Sieve => Method::Sieve,
            MethodArg::Lattice => Method::Lattice,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the coefficient table a(n), λ(n) and check it
    Eigenvalues,
    /// Run one verification suite
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
        #[arg(long, default_value = "alpha", value_parser = config::parse_poly)]
        poly: PolynomialKind,
    },
    /// Power moments S_r(X) at geometric checkpoints up to the limit
    Moments {
        #[arg(long)]
        r: u32,
        #[arg(long, value_enum, default_value = "sieve")]
        method: MethodArg,
        #[arg(long, default_value = "alpha", value_parser = config::parse_poly)]
        poly: PolynomialKind,
    },
    /// Evaluate the main-term constant C and its Euler factors
    Constant,
    /// Run every suite and collect the summaries into report.json
    Report,
    /// Write the sieve tables χ₈, σ, square-free flag and divisor count
    Tables,
}

/// Runs one parsed command, printing progress to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.global)?;
    let body = |out: &mut dyn Write| -> Result<(), CliError> {
        match &cli.command {
            Command::Eigenvalues => commands::eigenvalues(&cfg, out),
            Command::Verify { target, poly } => commands::verify(&cfg, *target, *poly, out),
            Command::Moments { r, method, poly } => {
                commands::moments(&cfg, *r, (*method).into(), *poly, out)
            }
            Command::Constant => commands::constant(&cfg, out),
            Command::Report => commands::report(&cfg, out),
            Command::Tables => commands::tables(&cfg, out),
        }
    };
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cfg.threads)))?;
        // the pool runs the command on a worker thread; collect its output
        // there and copy it out afterwards
        let mut buffer = Vec::new();
        let result = pool.install(|| body(&mut buffer));
        out.write_all(&buffer)?;
        result
    } else {
        body(out)
    }
}
