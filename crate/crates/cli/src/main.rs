//! `sharpe-qubo`: prepare market data, build and solve QUBO portfolio models,
//! calibrate penalty weights and summarize results.
//!
//! Exit status: 0 on success, 2 when the result is infeasible, 1 on error.

mod commands;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sharpe_qubo::formulations::FormulationKind;
use sharpe_qubo::market_data::ReturnKind;
use sharpe_qubo::solvers::SolverKind;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "sharpe-qubo", version, about = "QUBO formulations of long-only Max-Sharpe portfolios")]
struct Cli {
    /// Worker threads for solver restarts and calibration pairs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded synthetic price CSV.
    Synth(SynthArgs),
    /// Clean prices and compute annualized statistics.
    Prepare(PrepareArgs),
    /// Build a QUBO model from statistics.
    Build(BuildArgs),
    /// Solve a QUBO model and decode the best portfolio.
    Solve(SolveArgs),
    /// Sweep a grid of penalty weights.
    Calibrate(CalibrateArgs),
    /// Summarize solution files against the classical baseline.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub assets: usize,
    #[arg(long, default_value_t = 756)]
    pub days: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PrepareArgs {
    #[arg(long)]
    pub prices: PathBuf,
    /// Return kind; picked by the lower Jarque-Bera score when omitted.
    #[arg(long)]
    pub returns: Option<ReturnKind>,
    /// Longest tolerated run of missing prices before an asset is dropped.
    #[arg(long, default_value_t = 1)]
    pub max_missing: usize,
    #[arg(long, default_value_t = 252)]
    pub frequency: u32,
    /// Keep assets with nonpositive expected return.
    #[arg(long)]
    pub keep_nonpositive: bool,
    #[arg(long, default_value_t = 50)]
    pub qq_points: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct FormulationArgs {
    #[arg(long)]
    pub kind: FormulationKind,
    /// Bits per asset (default 9 for proxy; for proposed the largest count up to 12 that fits).
    #[arg(long)]
    pub bits: Option<usize>,
    /// Resolution of the proposed formulation's y variables.
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub stats: PathBuf,
    #[command(flatten)]
    pub formulation: FormulationArgs,
    #[arg(long)]
    pub lambda0: f64,
    #[arg(long)]
    pub lambda1: f64,
    /// Model file; without it only the size is reported.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// JSON solver block {solver, sweeps, beta_start, beta_end, restarts, iterations, tenure, seed}.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub solver: Option<SolverKind>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub stats: PathBuf,
    #[command(flatten)]
    pub formulation: FormulationArgs,
    /// JSON grid {pairs: [[lambda0, lambda1], ...], runs_per_pair}.
    #[arg(long)]
    pub grid: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also collect this many feasible solutions at the chosen pair.
    #[arg(long)]
    pub collect: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub max_attempts: usize,
    /// Write the model built with the chosen pair here.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub stats: PathBuf,
    /// Solution files written by `solve`.
    #[arg(required = true)]
    pub solutions: Vec<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// How a successful command ended.
pub enum Outcome {
    Done,
    Infeasible,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Synth(a) => commands::synth(&a),
        Command::Prepare(a) => commands::prepare(&a),
        Command::Build(a) => commands::build(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Calibrate(a) => commands::calibrate(&a),
        Command::Report(a) => commands::report(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
