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
pub struct TabuParams {
    pub iterations: usize,
    pub tenure: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl TabuParams {
    pub fn new(iterations: usize, tenure: usize, seed: u64) -> Self {
        Self { iterations, tenure, restarts: 1, seed }
    }

    /// `min(20, n/4)`, at least 1.
    pub fn default_tenure(n: usize) -> usize {
        (n / 4).clamp(1, 20)
    }
}

/// Steepest single-flip tabu search. A flipped variable stays tabu for
/// `tenure` iterations unless flipping it would beat the incumbent. When
/// every move is tabu the oldest tabu variable is released.
pub fn tabu_search<T: Scalar>(q: &QuboMatrix<T>, params: &TabuParams) -> Result<SolveResult<T>, SolverError> {
    if params.tenure == 0 {
        return Err(SolverError::InvalidParameters("tenure must be at least 1".into()));
    }
    if params.restarts == 0 {
        return Err(SolverError::InvalidParameters("restarts must be at least 1".into()));
    }
    let n = q.n();
    if n == 0 {
        return Err(SolverError::Empty);
    }
    let start = Instant::now();
    let adj = Adjacency::new(q);
    let tenure = params.tenure.min(n.saturating_sub(1)).max(if n == 1 { 0 } else { 1 });

    let samples = (0..params.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &[r as u64]));
            let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            let mut lf = adj.fields(x);
            let mut e = 0.0f64;
            let mut best_e = 0.0f64;
            let mut best = lf.x.clone();
            let mut tabu_until = vec![0usize; n];
            for it in 1..=params.iterations {
                let mut pick: Option<(usize, f64)> = None;
                let mut oldest: Option<(usize, usize)> = None;
                for i in 0..n {
                    let d = lf.delta(i).as_f64();
                    let allowed = tabu_until[i] < it || e + d < best_e;
                    if allowed {
                        if pick.is_none_or(|(_, pd)| d < pd) {
                            pick = Some((i, d));
                        }
                    } else if oldest.is_none_or(|(_, t)| tabu_until[i] < t) {
                        oldest = Some((i, tabu_until[i]));
                    }
                }
                let (i, d) = match (pick, oldest) {
                    (Some(p), _) => p,
                    (None, Some((i, _))) => (i, lf.delta(i).as_f64()),
                    (None, None) => break,
                };
                lf.flip(i);
                e += d;
                tabu_until[i] = it + tenure;
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
