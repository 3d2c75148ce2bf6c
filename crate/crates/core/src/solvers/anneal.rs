use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fields::Adjacency;
use super::{derive_seed, Sample, SolveResult, SolverError};
use crate::qubo::QuboMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl AnnealSchedule {
    /// Inverse temperatures at which the largest possible uphill flip is
    /// accepted with probability 1/2 (start) and the smallest with
    /// probability 1/100 (end).
    pub fn default_betas<T: Scalar>(q: &QuboMatrix<T>) -> (f64, f64) {
        let (max, min) = Adjacency::new(q).delta_range();
        if max == 0.0 {
            return (1.0, 1.0);
        }
        let hot = std::f64::consts::LN_2 / max;
        let cold = 100f64.ln() / min;
        (hot, cold.max(hot))
    }

    pub fn for_matrix<T: Scalar>(q: &QuboMatrix<T>, sweeps: usize, restarts: usize, seed: u64) -> Self {
        let (beta_start, beta_end) = Self::default_betas(q);
        Self { sweeps, beta_start, beta_end, restarts, seed }
    }

    fn validate(&self) -> Result<(), SolverError> {
        if !(self.beta_start > 0.0 && self.beta_start <= self.beta_end && self.beta_end.is_finite()) {
            return Err(SolverError::InvalidParameters(format!(
                "need 0 < beta_start <= beta_end, got {} and {}",
                self.beta_start, self.beta_end
            )));
        }
        if self.sweeps == 0 || self.restarts == 0 {
            return Err(SolverError::InvalidParameters("sweeps and restarts must be at least 1".into()));
        }
        Ok(())
    }

    fn beta(&self, sweep: usize) -> f64 {
        if self.sweeps == 1 {
            return self.beta_end;
        }
        let t = sweep as f64 / (self.sweeps - 1) as f64;
        self.beta_start * (self.beta_end / self.beta_start).powf(t)
    }
}

/// Single-flip Metropolis annealing from a uniformly random start. Each
/// restart keeps the lowest state seen at a sweep boundary, then descends
/// greedily to a local minimum; its energy is recomputed from `q`.
pub fn simulated_annealing<T: Scalar>(
    q: &QuboMatrix<T>,
    schedule: &AnnealSchedule,
) -> Result<SolveResult<T>, SolverError> {
    schedule.validate()?;
    let n = q.n();
    if n == 0 {
        return Err(SolverError::Empty);
    }
    let start = Instant::now();
    let adj = Adjacency::new(q);
    let betas: Vec<f64> = (0..schedule.sweeps).map(|s| schedule.beta(s)).collect();

    let samples = (0..schedule.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(schedule.seed, &[r as u64]));
            let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            let mut lf = adj.fields(x);
            let mut e = 0.0f64;
            let mut best_e = 0.0f64;
            let mut best = lf.x.clone();
            for &beta in &betas {
                for i in 0..n {
                    let d = lf.delta(i).as_f64();
                    if d <= 0.0 || rng.random::<f64>() < (-beta * d).exp() {
                        lf.flip(i);
                        e += d;
                    }
                }
                if e < best_e {
                    best_e = e;
                    best.clone_from(&lf.x);
                }
            }
            let mut lf = adj.fields(best);
            lf.descend();
            let energy = q.evaluate(&lf.x)?;
            Ok(Sample { bits: lf.x, energy })
        })
        .collect::<Result<Vec<_>, SolverError>>()?;
    Ok(SolveResult::from_samples(samples, start.elapsed()))
}
