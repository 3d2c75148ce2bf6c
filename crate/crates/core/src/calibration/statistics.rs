use std::io::Write;

use serde::{Deserialize, Serialize};

use super::CalibrationError;
use crate::formulations::{FormulationKind, QuboModel};
use crate::qubo::bits_to_string;
use crate::scalar::Scalar;
use crate::solvers::{derive_seed, solve, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub attempt: usize,
    pub seed: u64,
    pub bits: String,
    pub weights: Vec<f64>,
    pub sharpe: Option<f64>,
    pub asset_count: usize,
    pub energy: f64,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpeSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStatistics {
    pub kind: FormulationKind,
    pub lambda0: f64,
    pub lambda1: f64,
    pub requested: usize,
    pub attempts: usize,
    /// Set when `max_attempts` ran out before `requested` feasible solutions.
    pub shortfall: bool,
    pub sharpe: Option<SharpeSummary>,
    pub asset_count: Option<CountSummary>,
    pub solutions: Vec<SolutionRecord>,
}

impl SharpeSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
        Some(Self { min: v[0], max: v[n - 1], mean: v.iter().sum::<f64>() / n as f64, median })
    }
}

impl CountSummary {
    pub fn from_counts(counts: &[usize]) -> Option<Self> {
        Some(Self {
            min: *counts.iter().min()?,
            max: *counts.iter().max()?,
            mean: counts.iter().sum::<usize>() as f64 / counts.len() as f64,
        })
    }
}

/// Solves `model` with seeds `derive_seed(seed, [attempt])` until
/// `n_feasible` feasible portfolios are found or `max_attempts` is used up.
pub fn collect_statistics<T: Scalar>(
    model: &QuboModel<T>,
    config: &SolverConfig,
    n_feasible: usize,
    max_attempts: usize,
    seed: u64,
) -> Result<RunStatistics, CalibrationError> {
    if n_feasible == 0 {
        return Err(CalibrationError::NothingRequested);
    }
    let mut solutions = Vec::with_capacity(n_feasible);
    let mut attempts = 0;
    while solutions.len() < n_feasible && attempts < max_attempts {
        let s = derive_seed(seed, &[attempts as u64]);
        let result = solve(&model.matrix, &config.with_seed(s))?;
        let sol = model.decode(&result.best_bits)?;
        if sol.feasible {
            solutions.push(SolutionRecord {
                attempt: attempts,
                seed: s,
                bits: bits_to_string(&sol.bits),
                weights: sol.weights.iter().map(|w| w.as_f64()).collect(),
                sharpe: sol.sharpe.map(|v| v.as_f64()),
                asset_count: sol.asset_count(),
                energy: result.best_energy.as_f64(),
                residual: sol.residual.as_f64(),
            });
        }
        attempts += 1;
    }
    let sharpes: Vec<f64> = solutions.iter().filter_map(|s| s.sharpe).collect();
    let counts: Vec<usize> = solutions.iter().map(|s| s.asset_count).collect();
    Ok(RunStatistics {
        kind: model.kind,
        lambda0: model.lambda0.as_f64(),
        lambda1: model.lambda1.as_f64(),
        requested: n_feasible,
        attempts,
        shortfall: solutions.len() < n_feasible,
        sharpe: SharpeSummary::from_values(&sharpes),
        asset_count: CountSummary::from_counts(&counts),
        solutions,
    })
}

#[derive(Serialize)]
struct Row<'a> {
    attempt: usize,
    seed: u64,
    sharpe: Option<f64>,
    asset_count: usize,
    energy: f64,
    residual: f64,
    bits: &'a str,
}

/// One CSV row per recorded feasible solution.
pub fn write_statistics_csv<W: Write>(stats: &RunStatistics, sink: W) -> Result<(), CalibrationError> {
    let mut w = csv::Writer::from_writer(sink);
    for s in &stats.solutions {
        w.serialize(Row {
            attempt: s.attempt,
            seed: s.seed,
            sharpe: s.sharpe,
            asset_count: s.asset_count,
            energy: s.energy,
            residual: s.residual,
            bits: &s.bits,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summaries() {
        let s = SharpeSummary::from_values(&[3.0, 1.0, 2.0, 10.0]).unwrap();
        assert_eq!((s.min, s.max, s.mean, s.median), (1.0, 10.0, 4.0, 2.5));
        assert_eq!(SharpeSummary::from_values(&[2.0, 1.0, 5.0]).unwrap().median, 2.0);
        assert!(SharpeSummary::from_values(&[]).is_none());
        let c = CountSummary::from_counts(&[2, 4, 3]).unwrap();
        assert_eq!((c.min, c.max, c.mean), (2, 4, 3.0));
    }
}
