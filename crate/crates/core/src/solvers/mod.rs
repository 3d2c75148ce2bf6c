//! QUBO minimizers and the classical long-only Max-Sharpe baseline.
//!
//! Every heuristic is deterministic for a fixed seed: restart `r` draws from
//! its own stream seeded by `derive_seed(seed, &[r])`, so restarts can run in
//! parallel without changing results.

mod anneal;
mod classical;
mod exhaustive;
mod fields;
mod tabu;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use anneal::{simulated_annealing, AnnealSchedule};
pub use classical::{
    classical_max_sharpe, project_budget_simplex, projected_gradient_max_sharpe, tangency_closed_form,
};
pub use exhaustive::{exhaustive, MAX_EXHAUSTIVE_VARIABLES};
pub use tabu::{tabu_search, TabuParams};

use crate::qubo::{bit_order, serde_bits, QuboError, QuboMatrix};
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver parameters: {0}")]
    InvalidParameters(String),
    #[error("exhaustive search is limited to {max} variables, model has {n}")]
    TooLarge { n: usize, max: usize },
    #[error("model has no variables")]
    Empty,
    #[error("expected returns must be positive (asset {0})")]
    NonPositiveMu(String),
    #[error("projected gradient did not converge in {iterations} iterations (last step {last_step:e})")]
    NotConverged { iterations: usize, last_step: f64, last: Vec<f64> },
    #[error(transparent)]
    Qubo(#[from] QuboError),
}

/// One restart's final state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Sample<T> {
    #[serde(with = "serde_bits")]
    pub bits: Vec<bool>,
    pub energy: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult<T> {
    pub best_bits: Vec<bool>,
    pub best_energy: T,
    pub samples: Vec<Sample<T>>,
    pub wall_time: Duration,
}

impl<T: Scalar> SolveResult<T> {
    /// Picks the lowest-energy sample; equal energies go to the smaller
    /// bitstring under [`bit_order`].
    pub(crate) fn from_samples(samples: Vec<Sample<T>>, wall_time: Duration) -> Self {
        let best = samples
            .iter()
            .min_by(|a, b| {
                a.energy
                    .partial_cmp(&b.energy)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| bit_order(&a.bits, &b.bits))
            })
            .expect("at least one sample");
        Self { best_bits: best.bits.clone(), best_energy: best.energy, samples: samples.clone(), wall_time }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Sa,
    Tabu,
    Exhaustive,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Sa => "sa",
            SolverKind::Tabu => "tabu",
            SolverKind::Exhaustive => "exhaustive",
        })
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sa" => Ok(SolverKind::Sa),
            "tabu" => Ok(SolverKind::Tabu),
            "exhaustive" => Ok(SolverKind::Exhaustive),
            other => Err(format!("unknown solver {other:?} (expected sa|tabu|exhaustive)")),
        }
    }
}

/// Solver selection and parameters, as read from a JSON config block.
/// Missing fields take their defaults; missing betas are derived from the
/// coefficient scale of the model being solved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub solver: SolverKind,
    pub sweeps: usize,
    pub beta_start: Option<f64>,
    pub beta_end: Option<f64>,
    pub restarts: usize,
    pub iterations: usize,
    pub tenure: Option<usize>,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            solver: SolverKind::Sa,
            sweeps: 1000,
            beta_start: None,
            beta_end: None,
            restarts: 10,
            iterations: 5000,
            tenure: None,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn anneal_schedule<T: Scalar>(&self, q: &QuboMatrix<T>) -> AnnealSchedule {
        let (hot, cold) = AnnealSchedule::default_betas(q);
        AnnealSchedule {
            sweeps: self.sweeps,
            beta_start: self.beta_start.unwrap_or(hot),
            beta_end: self.beta_end.unwrap_or(cold.max(self.beta_start.unwrap_or(hot))),
            restarts: self.restarts,
            seed: self.seed,
        }
    }

    pub fn tabu_params(&self, n: usize) -> TabuParams {
        TabuParams {
            iterations: self.iterations,
            tenure: self.tenure.unwrap_or_else(|| TabuParams::default_tenure(n)),
            restarts: self.restarts.max(1),
            seed: self.seed,
        }
    }
}

/// Runs the configured solver on `q`.
pub fn solve<T: Scalar>(q: &QuboMatrix<T>, config: &SolverConfig) -> Result<SolveResult<T>, SolverError> {
    match config.solver {
        SolverKind::Sa => simulated_annealing(q, &config.anneal_schedule(q)),
        SolverKind::Tabu => tabu_search(q, &config.tabu_params(q.n())),
        SolverKind::Exhaustive => exhaustive(q),
    }
}

/// Mixes `parts` into `base` with the SplitMix64 finalizer.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_fill_missing_fields() {
        let c: SolverConfig = serde_json::from_str(r#"{"solver": "tabu", "seed": 5}"#).unwrap();
        assert_eq!(c.solver, SolverKind::Tabu);
        assert_eq!(c.seed, 5);
        assert_eq!(c.iterations, 5000);
        assert!(serde_json::from_str::<SolverConfig>(r#"{"solver": "qbsolv"}"#).is_err());
        assert!(serde_json::from_str::<SolverConfig>(r#"{"sweep": 3}"#).is_err());
    }

    #[test]
    fn seeds_differ_by_part() {
        let a = derive_seed(1, &[0, 1]);
        assert_eq!(a, derive_seed(1, &[0, 1]));
        assert_ne!(a, derive_seed(1, &[1, 0]));
        assert_ne!(a, derive_seed(2, &[0, 1]));
    }

    #[test]
    fn best_sample_tie_break() {
        let samples = vec![
            Sample { bits: vec![false, true], energy: -1.0 },
            Sample { bits: vec![true, false], energy: -1.0 },
            Sample { bits: vec![true, true], energy: 0.0 },
        ];
        let r = SolveResult::from_samples(samples, Duration::ZERO);
        assert_eq!(r.best_bits, vec![true, false]);
    }
}
