//! Command-line front end: loads operations, supermaps and testers from JSON, runs checks
//! and writes a single JSON report to stdout.
//!
//! Exit status is 0 when every requested check passes, 1 when a check fails and 2 when the
//! input cannot be read or does not describe a valid object.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

mod commands;
pub mod format;
mod selftest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl From<qsupermap::Error> for CliError {
    fn from(e: qsupermap::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub pass: bool,
    pub residual: f64,
    pub details: Value,
}

impl Report {
    pub fn new(check: &str, pass: bool, residual: f64, details: Value) -> Self {
        Self {
            check: check.to_string(),
            pass,
            residual: residual.max(0.0),
            details,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qsupermap",
    version,
    about = "Checks and circuit realizations for quantum supermaps"
)]
pub struct Cli {
    /// Seed for randomized checks (required by commands that sample).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Pass threshold for reported residuals.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SupermapCheck {
    Deterministic,
    ProbPreserving,
    EffectMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Corruption {
    /// Scale the V isometry of a realization fixture by 1.1.
    Isometry,
    /// Scale every tester effect by 1.2.
    Tester,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an operation file: complete positivity, trace non-increase, channel status.
    CheckOp {
        path: PathBuf,
        /// Fail unless the operation is trace preserving.
        #[arg(long)]
        require_channel: bool,
    },
    /// Convert a Kraus file to an operation (Choi) file.
    Kraus2choi { path: PathBuf },
    /// Convert an operation file to canonical Kraus operators.
    Choi2kraus { path: PathBuf },
    /// Apply an operation to a state.
    Apply {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
    /// Determinism, probability preservation, or effect-map extraction for a supermap.
    Supermap {
        path: PathBuf,
        #[arg(long, value_enum)]
        check: SupermapCheck,
    },
    /// Factor a deterministic supermap into isometries V, W.
    Realize { path: PathBuf },
    /// Realize probabilistic supermaps with a single final measurement.
    RealizeProb {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Random channels and states used to compare circuit and supermap actions.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Outcome probabilities of a tester on an operation.
    TesterEval {
        #[arg(long)]
        tester: PathBuf,
        #[arg(long)]
        op: PathBuf,
    },
    /// Normalization and informational completeness of a tester.
    TesterCheck { tester: PathBuf },
    /// Faithfulness of a tomography state, optionally with a POVM on the output.
    TomographyCheck {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        h_in: usize,
        /// Defaults to the input dimension.
        #[arg(long)]
        h_out: Option<usize>,
        #[arg(long)]
        povm: Option<PathBuf>,
    },
    /// The channel a programmable unitary device runs for a given program state.
    ProgramChannel {
        #[arg(long)]
        unitary: PathBuf,
        #[arg(long)]
        program: PathBuf,
        /// System dimension; the program dimension is inferred.
        #[arg(long)]
        sys: usize,
    },
    /// Run the randomized invariant suites end to end.
    Selftest {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Corrupt an internal fixture to confirm the harness reports failures.
        #[arg(long, value_enum)]
        corrupt: Option<Corruption>,
    },
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::Invalid(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    let ctx = commands::Context {
        seed: cli.seed,
        tol: cli.tol,
        out: cli.out.clone(),
    };
    match &cli.command {
        Command::CheckOp {
            path,
            require_channel,
        } => commands::check_op(&ctx, path, *require_channel),
        Command::Kraus2choi { path } => commands::kraus_to_choi(&ctx, path),
        Command::Choi2kraus { path } => commands::choi_to_kraus(&ctx, path),
        Command::Apply { op, state } => commands::apply(&ctx, op, state),
        Command::Supermap { path, check } => commands::supermap(&ctx, path, *check),
        Command::Realize { path } => commands::realize(&ctx, path),
        Command::RealizeProb { paths, trials } => commands::realize_prob(&ctx, paths, *trials),
        Command::TesterEval { tester, op } => commands::tester_eval(&ctx, tester, Some(op)),
        Command::TesterCheck { tester } => commands::tester_eval(&ctx, tester, None),
        Command::TomographyCheck {
            state,
            h_in,
            h_out,
            povm,
        } => {
            commands::tomography_check(&ctx, state, *h_in, h_out.unwrap_or(*h_in), povm.as_deref())
        }
        Command::ProgramChannel {
            unitary,
            program,
            sys,
        } => commands::program_channel(&ctx, unitary, program, *sys),
        Command::Selftest { trials, corrupt } => selftest::run(&ctx, *trials, *corrupt),
    }
}
