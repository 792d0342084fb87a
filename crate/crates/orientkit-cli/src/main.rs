//! The orientkit binary: argument parsing, dispatch, and output writing.

use clap::{Parser, Subcommand};

use orientkit_cli::commands::{self, Outcome};
use orientkit_cli::gen::{generate, GenParams};
use orientkit_cli::instance::{write_atomic, InstanceFile};
use orientkit_cli::{dot, CliError, GenArgs, RunArgs};

#[derive(Parser)]
#[command(
    name = "orientkit",
    version,
    about = "Orient the undirected edges of a graph to satisfy directed demands"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Buy and orient a min-cost subgraph satisfying every demand pair (4-approx).
    SteinerOrient(RunArgs),
    /// Orient every edge to satisfy as many demand pairs as possible (certified approx).
    MaxOrient(RunArgs),
    /// Decide whether some orientation satisfies at least k demand pairs.
    KPairs(RunArgs),
    /// Decide whether a mixed graph orients to satisfy every demand pair.
    MixedOrient(RunArgs),
    /// Buy and orient a min-cost subgraph carrying L node-disjoint paths each way.
    DisjointPaths(RunArgs),
    /// Reduce an instance to its kernel and report the size bound.
    Kernel(RunArgs),
    /// Exhaustive orientation oracle for small instances.
    Oracle(RunArgs),
    /// Generate a seeded random instance.
    Gen(GenArgs),
}

/// Worker threads for the parallel searches, from ORIENTKIT_THREADS
/// (default 1).
fn thread_count() -> Result<usize, CliError> {
    match std::env::var("ORIENTKIT_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| {
                CliError::malformed(format!("ORIENTKIT_THREADS={v:?} is not a positive integer"))
            }),
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(CliError::malformed(format!("ORIENTKIT_THREADS: {e}"))),
    }
}

fn run_with(
    args: RunArgs,
    threads: usize,
    f: fn(&InstanceFile, &RunArgs, usize) -> Result<Outcome, CliError>,
) -> Result<i32, CliError> {
    let inst = InstanceFile::load(&args.input)?;
    let outcome = f(&inst, &args, threads)?;
    match &args.out {
        Some(p) => write_atomic(p, outcome.json.as_bytes())?,
        None => print!("{}", outcome.json),
    }
    if let Some(p) = &args.dot {
        let text = outcome.dot.expect("dot text is built whenever --dot is set");
        write_atomic(p, text.as_bytes())?;
    }
    Ok(outcome.exit)
}

fn run_gen(args: GenArgs) -> Result<i32, CliError> {
    let params = GenParams {
        family: args.family,
        nodes: args.nodes,
        max_edges: args.cap_edges,
        max_pairs: args.cap_pairs,
        ell: args.ell,
        seed: args.seed,
    };
    let inst = generate(&params)?;
    let json = inst.to_json();
    match &args.out {
        Some(p) => write_atomic(p, json.as_bytes())?,
        None => print!("{json}"),
    }
    if let Some(p) = &args.dot {
        let (g, pairs) = inst.to_graph(true)?;
        write_atomic(p, dot::export_dot(&g, &pairs, None).as_bytes())?;
    }
    Ok(0)
}

fn dispatch(cmd: Cmd, threads: usize) -> Result<i32, CliError> {
    match cmd {
        Cmd::SteinerOrient(a) => run_with(a, threads, commands::steiner_orient),
        Cmd::MaxOrient(a) => run_with(a, threads, commands::max_orient),
        Cmd::KPairs(a) => run_with(a, threads, commands::k_pairs),
        Cmd::MixedOrient(a) => run_with(a, threads, commands::mixed_orient),
        Cmd::DisjointPaths(a) => run_with(a, threads, commands::disjoint_paths),
        Cmd::Kernel(a) => run_with(a, threads, commands::kernel),
        Cmd::Oracle(a) => run_with(a, threads, commands::oracle),
        Cmd::Gen(a) => run_gen(a),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version are successes; anything else is malformed input.
            use clap::error::ErrorKind;
            let code =
                if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                    0
                } else {
                    1
                };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match thread_count().and_then(|threads| dispatch(cli.cmd, threads)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    };
    std::process::exit(code);
}
