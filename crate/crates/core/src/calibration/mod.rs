//! Penalty-weight calibration and repeated-solve statistics.
//!
//! [`calibrate`] sweeps a grid of `(lambda0, lambda1)` pairs, solving each
//! built QUBO several times, and picks the pair with the highest share of
//! feasible decoded portfolios. [`collect_statistics`] then solves a fixed
//! model until enough feasible portfolios are found and summarizes their
//! Sharpe ratios and asset counts.

mod statistics;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use statistics::{collect_statistics, write_statistics_csv, CountSummary, RunStatistics, SharpeSummary, SolutionRecord};

use crate::formulations::{FormulationError, FormulationKind, FormulationSpec};
use crate::market_data::AssetStats;
use crate::scalar::Scalar;
use crate::solvers::{derive_seed, solve, SolverConfig, SolverError, SolverKind};

pub const DEFAULT_RUNS_PER_PAIR: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),
    #[error("no feasible configuration: every lambda pair produced zero feasible runs")]
    NoFeasible(Box<CalibrationReport>),
    #[error("n_feasible must be at least 1")]
    NothingRequested,
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn default_runs() -> usize {
    DEFAULT_RUNS_PER_PAIR
}

/// Candidate penalty weights; serialized as `{"pairs": [[l0, l1], ...], "runs_per_pair": 20}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub pairs: Vec<(f64, f64)>,
    #[serde(default = "default_runs")]
    pub runs_per_pair: usize,
}

impl LambdaGrid {
    pub fn new(pairs: Vec<(f64, f64)>) -> Self {
        Self { pairs, runs_per_pair: DEFAULT_RUNS_PER_PAIR }
    }

    /// Every combination of the given values, `lambda0` outermost.
    pub fn product(lambda0: &[f64], lambda1: &[f64], runs_per_pair: usize) -> Self {
        let pairs = lambda0.iter().flat_map(|&a| lambda1.iter().map(move |&b| (a, b))).collect();
        Self { pairs, runs_per_pair }
    }

    /// `lambda0` must be positive; `lambda1 = 0` is accepted so that the
    /// unconstrained objective can be included as a reference.
    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.pairs.is_empty() {
            return Err(CalibrationError::InvalidGrid("no pairs".into()));
        }
        if self.runs_per_pair == 0 {
            return Err(CalibrationError::InvalidGrid("runs_per_pair must be at least 1".into()));
        }
        for &(a, b) in &self.pairs {
            if !(a > 0.0 && a.is_finite() && b >= 0.0 && b.is_finite()) {
                return Err(CalibrationError::InvalidGrid(format!("bad pair ({a}, {b})")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaPair {
    pub lambda0: f64,
    pub lambda1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub energy: f64,
    pub feasible: bool,
    pub residual: f64,
    pub sharpe: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub lambda0: f64,
    pub lambda1: f64,
    pub n_variables: usize,
    pub feasible_count: usize,
    pub total_runs: usize,
    /// `feasible_count / total_runs`, in `[0, 1]`.
    pub feasible_pct: f64,
    pub best_sharpe: Option<f64>,
    pub mean_sharpe_feasible: Option<f64>,
    pub runs: Vec<RunRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub kind: FormulationKind,
    pub solver: SolverKind,
    pub seed: u64,
    pub runs_per_pair: usize,
    pub records: Vec<PairRecord>,
    pub chosen: Option<LambdaPair>,
}

/// Seed for run `run` of the pair `(lambda0, lambda1)`. Depends on the pair
/// values rather than its position, so repeated pairs repeat their runs.
pub fn run_seed(seed: u64, lambda0: f64, lambda1: f64, run: usize) -> u64 {
    derive_seed(seed, &[lambda0.to_bits(), lambda1.to_bits(), run as u64])
}

/// Solves every grid pair `runs_per_pair` times and selects the pair with the
/// highest feasible fraction, then the highest best Sharpe, then the
/// lowest `lambda1`. Pairs are evaluated in parallel.
pub fn calibrate<T: Scalar>(
    spec: &FormulationSpec,
    stats: &AssetStats<T>,
    grid: &LambdaGrid,
    config: &SolverConfig,
    seed: u64,
) -> Result<CalibrationReport, CalibrationError> {
    grid.validate()?;
    let records = grid
        .pairs
        .par_iter()
        .map(|&(l0, l1)| evaluate_pair(spec, stats, l0, l1, grid.runs_per_pair, config, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let chosen = choose(&records).map(|r| LambdaPair { lambda0: r.lambda0, lambda1: r.lambda1 });
    let report = CalibrationReport {
        kind: spec.kind,
        solver: config.solver,
        seed,
        runs_per_pair: grid.runs_per_pair,
        records,
        chosen,
    };
    if report.chosen.is_none() {
        return Err(CalibrationError::NoFeasible(Box::new(report)));
    }
    Ok(report)
}

fn evaluate_pair<T: Scalar>(
    spec: &FormulationSpec,
    stats: &AssetStats<T>,
    l0: f64,
    l1: f64,
    runs_per_pair: usize,
    config: &SolverConfig,
    seed: u64,
) -> Result<PairRecord, CalibrationError> {
    let model = spec.build(stats, T::lit(l0), T::lit(l1))?;
    let mut runs = Vec::with_capacity(runs_per_pair);
    for run in 0..runs_per_pair {
        let s = run_seed(seed, l0, l1, run);
        let result = solve(&model.matrix, &config.with_seed(s))?;
        let sol = model.decode(&result.best_bits)?;
        runs.push(RunRecord {
            run,
            seed: s,
            energy: result.best_energy.as_f64(),
            feasible: sol.feasible,
            residual: sol.residual.as_f64(),
            sharpe: sol.sharpe.map(|v| v.as_f64()),
        });
    }
    let feasible: Vec<f64> = runs.iter().filter(|r| r.feasible).filter_map(|r| r.sharpe).collect();
    let feasible_count = runs.iter().filter(|r| r.feasible).count();
    Ok(PairRecord {
        lambda0: l0,
        lambda1: l1,
        n_variables: model.n_variables(),
        feasible_count,
        total_runs: runs_per_pair,
        feasible_pct: feasible_count as f64 / runs_per_pair as f64,
        best_sharpe: feasible.iter().copied().reduce(f64::max),
        mean_sharpe_feasible: (!feasible.is_empty()).then(|| feasible.iter().sum::<f64>() / feasible.len() as f64),
        runs,
    })
}

fn choose(records: &[PairRecord]) -> Option<&PairRecord> {
    let mut best: Option<&PairRecord> = None;
    for r in records.iter().filter(|r| r.feasible_count > 0) {
        let better = match best {
            None => true,
            Some(b) => {
                let (rs, bs) = (r.best_sharpe.unwrap_or(f64::NEG_INFINITY), b.best_sharpe.unwrap_or(f64::NEG_INFINITY));
                r.feasible_pct > b.feasible_pct
                    || (r.feasible_pct == b.feasible_pct && (rs > bs || (rs == bs && r.lambda1 < b.lambda1)))
            }
        };
        if better {
            best = Some(r);
        }
    }
    best
}

#[derive(Serialize)]
struct PairRow {
    lambda0: f64,
    lambda1: f64,
    n_variables: usize,
    feasible_count: usize,
    total_runs: usize,
    feasible_pct: f64,
    best_sharpe: Option<f64>,
    mean_sharpe_feasible: Option<f64>,
    chosen: bool,
}

/// One CSV row per grid pair.
pub fn write_report_csv<W: Write>(report: &CalibrationReport, sink: W) -> Result<(), CalibrationError> {
    let mut w = csv::Writer::from_writer(sink);
    for r in &report.records {
        let chosen = report.chosen.is_some_and(|c| c.lambda0 == r.lambda0 && c.lambda1 == r.lambda1);
        w.serialize(PairRow {
            lambda0: r.lambda0,
            lambda1: r.lambda1,
            n_variables: r.n_variables,
            feasible_count: r.feasible_count,
            total_runs: r.total_runs,
            feasible_pct: r.feasible_pct,
            best_sharpe: r.best_sharpe,
            mean_sharpe_feasible: r.mean_sharpe_feasible,
            chosen,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(l1: f64, count: usize, best: Option<f64>) -> PairRecord {
        PairRecord {
            lambda0: 1.0,
            lambda1: l1,
            n_variables: 1,
            feasible_count: count,
            total_runs: 10,
            feasible_pct: count as f64 / 10.0,
            best_sharpe: best,
            mean_sharpe_feasible: best,
            runs: Vec::new(),
        }
    }

    #[test]
    fn selection_order() {
        let recs = vec![record(5.0, 8, Some(1.0)), record(3.0, 9, Some(0.5)), record(1.0, 9, Some(0.7))];
        assert_eq!(choose(&recs).unwrap().lambda1, 1.0);
        let recs = vec![record(5.0, 9, Some(0.7)), record(3.0, 9, Some(0.7))];
        assert_eq!(choose(&recs).unwrap().lambda1, 3.0);
        assert!(choose(&[record(1.0, 0, None)]).is_none());
    }

    #[test]
    fn grid_validation() {
        assert!(LambdaGrid::new(vec![]).validate().is_err());
        assert!(LambdaGrid::new(vec![(0.0, 1.0)]).validate().is_err());
        assert!(LambdaGrid::new(vec![(1.0, -1.0)]).validate().is_err());
        assert!(LambdaGrid::new(vec![(1.0, 0.0)]).validate().is_ok());
        let g: LambdaGrid = serde_json::from_str(r#"{"pairs": [[1, 2], [3, 4]]}"#).unwrap();
        assert_eq!(g.runs_per_pair, 20);
        assert_eq!(g.pairs, vec![(1.0, 2.0), (3.0, 4.0)]);
        assert_eq!(LambdaGrid::product(&[1.0, 2.0], &[3.0], 5).pairs, vec![(1.0, 3.0), (2.0, 3.0)]);
    }

    #[test]
    fn run_seeds_follow_values() {
        assert_eq!(run_seed(3, 1.0, 2.0, 4), run_seed(3, 1.0, 2.0, 4));
        assert_ne!(run_seed(3, 1.0, 2.0, 4), run_seed(3, 2.0, 1.0, 4));
        assert_ne!(run_seed(3, 1.0, 2.0, 4), run_seed(3, 1.0, 2.0, 5));
    }
}
