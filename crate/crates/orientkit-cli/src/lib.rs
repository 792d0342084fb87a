//! Implementation of the orientkit command-line interface; the `orientkit`
//! binary is a thin wrapper around this library so the schema types and
//! subcommand runners stay testable.
//!
//! Exit codes: 0 success, 1 malformed input, 2 infeasible instance,
//! 3 verification failure, 4 enumeration cap exceeded.

pub mod commands;
pub mod dot;
pub mod gen;
pub mod instance;

use std::path::PathBuf;

use clap::Args;

/// An error that terminates the process with a contract exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    pub fn malformed(msg: String) -> CliError {
        CliError { code: 1, msg }
    }

    pub fn verification(msg: String) -> CliError {
        CliError { code: 3, msg }
    }
}

#[derive(Args)]
pub struct RunArgs {
    /// Instance file (JSON).
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Result file; written to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Accepted for interface uniformity; every solver is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pair target for k-pairs (overrides the instance's k).
    #[arg(long)]
    pub k: Option<usize>,
    /// Path demand for disjoint-paths (overrides the instance's ell).
    #[arg(long)]
    pub ell: Option<i64>,
    /// Source terminal for disjoint-paths (overrides the instance's s).
    #[arg(long)]
    pub s: Option<usize>,
    /// Target terminal for disjoint-paths (overrides the instance's t).
    #[arg(long)]
    pub t: Option<usize>,
    /// Re-check the result against the brute-force oracle; exit 3 on disagreement.
    #[arg(long)]
    pub oracle_check: bool,
    /// Edge cap for exhaustive enumeration (default 20).
    #[arg(long)]
    pub cap_edges: Option<usize>,
    /// Pair cap for the mixed decision (default 4).
    #[arg(long)]
    pub cap_pairs: Option<usize>,
    /// Also render the result as DOT to this path.
    #[arg(long, value_name = "PATH")]
    pub dot: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenArgs {
    /// Instance family.
    #[arg(value_enum)]
    pub family: gen::Family,
    /// Instance file to write; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// RNG seed; identical seeds reproduce identical bytes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Node count.
    #[arg(long, default_value_t = 8)]
    pub nodes: usize,
    /// Edge budget (default sized for oracle verification).
    #[arg(long, default_value_t = 14)]
    pub cap_edges: usize,
    /// Demand-pair budget.
    #[arg(long, default_value_t = 3)]
    pub cap_pairs: usize,
    /// Path demand for the two-terminal family.
    #[arg(long, default_value_t = 2)]
    pub ell: i64,
    /// Also render the instance as DOT to this path.
    #[arg(long, value_name = "PATH")]
    pub dot: Option<PathBuf>,
}
