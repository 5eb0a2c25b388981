//! Command-line front end: every pipeline stage reads and writes files, so a
//! run can be audited or resumed from any artifact.
//!
//! Exit codes: 0 success, 2 invalid input or I/O, 3 solver failure,
//! 4 unsupported constraint family, 5 certificate rejected.

pub mod commands;
pub mod formats;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{run, Outcome};

/// Seed for randomized fixtures, from `CERTIBOUND_SEED` (default 20240917).
pub fn seed() -> u64 {
    std::env::var("CERTIBOUND_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(20240917)
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("solver failed: {0}")]
    SolveFailed(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("certificate rejected: {0}")]
    Rejected(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::SolveFailed(_) => 3,
            CliError::Unsupported(_) => 4,
            CliError::Rejected(_) => 5,
        }
    }
}

impl From<formats::FormatError> for CliError {
    fn from(e: formats::FormatError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "certibound", version, about = "Certified upper bounds for non-commutative polynomial optimization")]
pub struct Cli {
    /// Print a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the SDP relaxation of a problem file.
    Relax(RelaxArgs),
    /// Solve an SDP file, or import a solution computed elsewhere.
    Solve(SolveArgs),
    /// Round, project and lift a numerical solution into an exact certificate.
    Certify(CertifyArgs),
    /// Re-check a certificate against its problem in exact arithmetic.
    Verify(VerifyArgs),
    /// Collect run reports into a CSV table.
    Report(ReportArgs),
    /// Write a built-in problem family to a problem file.
    Gen(GenArgs),
    /// Exact-diagonalization ground energy of a Heisenberg chain.
    ExactEnergy(ChainArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Chordal {
    Minfill,
    Dense,
}

#[derive(Debug, Args)]
pub struct RelaxArgs {
    pub problem: PathBuf,
    #[arg(long, short = 'd')]
    pub order: usize,
    /// One Gram block per clique of the correlation graph.
    #[arg(long, conflicts_with = "symmetric")]
    pub sparse: bool,
    #[arg(long, value_enum, default_value = "minfill")]
    pub chordal: Chordal,
    /// Split the basis by the problem's declared involution.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub sdp: PathBuf,
    /// Take Gram blocks from this solution file instead of solving.
    #[arg(long)]
    pub import: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    pub eps_feas: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub gap_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub problem: PathBuf,
    pub solution: PathBuf,
    /// Rounding tolerance.
    #[arg(long, default_value = "1/1000000000000")]
    pub eta: String,
    /// Largest rounding denominator.
    #[arg(long, default_value = "10000000000000000")]
    pub max_den: String,
    /// Width of the certified eigenvalue enclosures.
    #[arg(long, default_value = "1/1000000000000")]
    pub gap: String,
    /// Lower the bound when the pre-certificate is positive definite.
    #[arg(long)]
    pub tighten: bool,
    /// Threads for the per-block spectral bounds.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
    /// Run report (JSON).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the projected pre-certificate.
    #[arg(long)]
    pub precert: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub certificate: PathBuf,
    pub problem: PathBuf,
    /// Write the verification report (JSON) here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run report files.
    pub runs: Vec<PathBuf>,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    Chsh {
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
    /// Tilted CHSH with rational tilts.
    Tilted {
        #[arg(long, default_value = "0")]
        theta_a: String,
        #[arg(long, default_value = "0")]
        theta_b: String,
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
    /// Entries of a Bell catalog file; all of them unless `--entry` is given.
    Bell {
        catalog: PathBuf,
        #[arg(long)]
        entry: Option<String>,
        /// Output file with `--entry`, otherwise a directory.
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
    Heisenberg {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long)]
    pub sites: usize,
    #[arg(long, default_value = "0")]
    pub j2: String,
    /// Open boundary conditions.
    #[arg(long)]
    pub open: bool,
}
