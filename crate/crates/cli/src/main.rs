//! `mdpsolve` — generate, solve and measure finite discounted MDPs.
//!
//! Subcommands: `gen` (random instance files), `solve` (policy iteration,
//! value iteration, alpha relaxation), `sweep-alpha` (rate/iteration sweep
//! over the relaxation parameter), `benchmark` (error-vs-iteration curves
//! for several methods on one instance) and `graph` (scalar operator
//! samples for single-state instances). All machine-readable output is CSV.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error (parse, validation,
//! I/O), 4 non-convergence.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "mdpsolve",
    version,
    about = "Finite discounted MDP solver and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random dense instance and write it as an MDP file
    Gen(GenArgs),
    /// Solve an instance file with one method and print a summary line
    Solve(SolveArgs),
    /// Sweep the relaxation parameter alpha and record rates per value
    SweepAlpha(SweepArgs),
    /// Run the methods listed in a benchmark spec and emit long-format CSV
    Benchmark(BenchmarkArgs),
    /// Sample the scalar Bellman operator of a single-state instance
    Graph(GraphArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of states
    n: usize,
    /// Number of actions
    m: usize,
    /// Discount factor, strictly inside (0,1)
    gamma: f64,
    /// RNG seed; defaults to MDPSOLVE_SEED or 0
    #[arg(env = "MDPSOLVE_SEED", default_value_t = 0)]
    seed: u64,
    /// Output path; omitted means stdout
    out: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Method {
    Pi,
    Vi,
    AlphaVi,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file
    mdp: std::path::PathBuf,
    /// Solver: pi, vi or alpha-vi
    #[arg(value_enum)]
    method: Method,
    /// Relaxation parameter (required for alpha-vi)
    #[arg(long)]
    alpha: Option<f64>,
    /// Residual threshold
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Interpret tol relative to 1 + the iterate norm
    #[arg(long)]
    relative_tol: bool,
    /// Iteration budget; defaults to 100000 (10000 for pi)
    #[arg(long)]
    max_iters: Option<usize>,
    /// Run alpha-vi even when alpha is at or below (1+gamma)/2
    #[arg(long)]
    force: bool,
    /// Write a per-iteration trace CSV here
    #[arg(long)]
    trace_out: Option<std::path::PathBuf>,
    /// Print the final cost vector after the summary line
    #[arg(long)]
    print_solution: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Instance file
    mdp: std::path::PathBuf,
    /// Low end of the alpha grid (the grid must exclude 0)
    alpha_min: f64,
    /// High end of the alpha grid
    alpha_max: f64,
    /// Number of grid points (endpoints included)
    steps: usize,
    /// Output CSV path
    out: std::path::PathBuf,
    /// Residual threshold per run
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration budget per run
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Fraction of the trace used for the tail rate
    #[arg(long, default_value_t = 0.5)]
    tail_fraction: f64,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Benchmark spec file (JSON)
    spec: std::path::PathBuf,
    /// Output CSV path; omitted means stdout
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    /// Instance file (must have exactly one state)
    mdp: std::path::PathBuf,
    /// Low end of the sampled theta interval
    theta_min: f64,
    /// High end of the sampled theta interval
    theta_max: f64,
    /// Number of grid samples (endpoints included)
    samples: usize,
    /// Output CSV path
    out: std::path::PathBuf,
    /// Also sample T_alpha for each listed alpha
    #[arg(long = "alpha")]
    alphas: Vec<f64>,
}

/// Errors carrying their process exit code.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    NonConvergence(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) | CliError::NonConvergence(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen::run(args),
        Command::Solve(args) => commands::solve::run(args),
        Command::SweepAlpha(args) => commands::sweep::run(args),
        Command::Benchmark(args) => commands::benchmark::run(args),
        Command::Graph(args) => commands::graph::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
