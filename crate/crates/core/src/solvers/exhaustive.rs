use std::time::Instant;

use super::fields::Adjacency;
use super::{Sample, SolveResult, SolverError};
use crate::qubo::QuboMatrix;
use crate::scalar::Scalar;

pub const MAX_EXHAUSTIVE_VARIABLES: usize = 24;

fn bits_of(g: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| g >> i & 1 == 1).collect()
}

/// Exact minimum by Gray-code enumeration. Near-ties in the running energy
/// are settled by exact re-evaluation, and exact ties go to the smaller
/// bitstring (variable 0 least significant).
pub fn exhaustive<T: Scalar>(q: &QuboMatrix<T>) -> Result<SolveResult<T>, SolverError> {
    let n = q.n();
    if n > MAX_EXHAUSTIVE_VARIABLES {
        return Err(SolverError::TooLarge { n, max: MAX_EXHAUSTIVE_VARIABLES });
    }
    let start = Instant::now();
    let adj = Adjacency::new(q);
    let scale: f64 = q.entries().map(|(_, _, v)| v.as_f64().abs()).sum();
    let tol = 1e-9 * (1.0 + scale);

    let mut lf = adj.fields(vec![false; n]);
    let mut e = 0.0f64;
    let mut best_g = 0u64;
    let mut best_e = 0.0f64;
    let mut best_exact: Option<T> = None;
    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        e += lf.delta(i).as_f64();
        lf.flip(i);
        if e < best_e - tol {
            best_e = e;
            best_g = k ^ (k >> 1);
            best_exact = None;
        } else if e <= best_e + tol {
            let g = k ^ (k >> 1);
            let incumbent = match best_exact {
                Some(v) => v,
                None => q.evaluate(&bits_of(best_g, n))?,
            };
            let here = q.evaluate(&lf.x)?;
            if here < incumbent || (here == incumbent && g < best_g) {
                best_g = g;
                best_e = e;
                best_exact = Some(here);
            } else {
                best_exact = Some(incumbent);
            }
        }
    }
    let bits = bits_of(best_g, n);
    let energy = q.evaluate(&bits)?;
    Ok(SolveResult::from_samples(vec![Sample { bits, energy }], start.elapsed()))
}
