use super::SolverError;
use crate::market_data::AssetStats;
use crate::scalar::Scalar;

/// Long-only maximum-Sharpe weights.
///
/// Solves `min y^T Sigma y` subject to `mu^T y = 1, y >= 0` and returns
/// `w = y / sum(y)`. If `Sigma^{-1} mu` is entrywise nonnegative it is the
/// answer and is returned directly; otherwise projected gradient is used.
pub fn classical_max_sharpe<T: Scalar>(
    stats: &AssetStats<T>,
    max_iters: usize,
    tol: f64,
) -> Result<Vec<T>, SolverError> {
    check_mu(stats)?;
    if stats.n_assets() == 1 {
        return Ok(vec![T::one()]);
    }
    match tangency_closed_form(stats) {
        Some(w) => Ok(w),
        None => projected_gradient_max_sharpe(stats, max_iters, tol),
    }
}

/// `Sigma^{-1} mu` normalized to unit sum, when it exists and has no
/// negative entry.
pub fn tangency_closed_form<T: Scalar>(stats: &AssetStats<T>) -> Option<Vec<T>> {
    let z = stats.cov.solve_spd(&stats.mu)?;
    if z.iter().any(|&v| v < T::zero() || !v.is_finite()) {
        return None;
    }
    let s: T = z.iter().copied().sum();
    if !(s > T::zero()) {
        return None;
    }
    Some(z.into_iter().map(|v| v / s).collect())
}

/// Accelerated projected gradient with adaptive restart. Stops once the
/// largest change in `y` falls below `tol * max(1, |y|_inf)`.
pub fn projected_gradient_max_sharpe<T: Scalar>(
    stats: &AssetStats<T>,
    max_iters: usize,
    tol: f64,
) -> Result<Vec<T>, SolverError> {
    check_mu(stats)?;
    let mu = &stats.mu;
    let n = mu.len();
    let lipschitz = T::lit(2.2) * stats.cov.spectral_radius(500);
    if !(lipschitz > T::zero()) {
        return Err(SolverError::InvalidParameters("covariance has no positive eigenvalue".into()));
    }
    let step = T::one() / lipschitz;
    let two = T::lit(2.0);
    let tol = T::lit(tol);

    let mu_sum: T = mu.iter().copied().sum();
    let mut y = vec![T::one() / mu_sum; n];
    let mut z = y.clone();
    let mut t = T::one();
    let mut last_step = f64::INFINITY;
    for _ in 0..max_iters {
        let g = stats.cov.mul_vec(&z);
        let moved: Vec<T> = z.iter().zip(&g).map(|(&zi, &gi)| zi - step * two * gi).collect();
        let next = project_budget_simplex(&moved, mu);

        let change = next.iter().zip(&y).map(|(&a, &b)| (a - b).abs()).fold(T::zero(), T::max);
        let scale = next.iter().copied().fold(T::one(), T::max);
        last_step = change.as_f64();

        // restart momentum when it points uphill
        let uphill = z.iter().zip(&next).zip(&y).map(|((&zi, &ni), &yi)| (zi - ni) * (ni - yi)).sum::<T>();
        let t_next = if uphill > T::zero() {
            T::one()
        } else {
            (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / two
        };
        let beta = if uphill > T::zero() { T::zero() } else { (t - T::one()) / t_next };
        z = next.iter().zip(&y).map(|(&ni, &yi)| ni + beta * (ni - yi)).collect();
        t = t_next;
        y = next;
        if change <= tol * scale {
            let s: T = y.iter().copied().sum();
            return Ok(y.into_iter().map(|v| v / s).collect());
        }
    }
    Err(SolverError::NotConverged {
        iterations: max_iters,
        last_step,
        last: y.iter().map(|v| v.as_f64()).collect(),
    })
}

/// Euclidean projection of `v` onto `{y : mu^T y = 1, y >= 0}` for positive
/// `mu`: `y = max(v + tau mu, 0)` with `tau` found exactly by scanning the
/// sorted breakpoints `-v_i / mu_i`.
pub fn project_budget_simplex<T: Scalar>(v: &[T], mu: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    let bp: Vec<T> = v.iter().zip(mu).map(|(&vi, &mi)| -vi / mi).collect();
    order.sort_by(|&a, &b| bp[a].partial_cmp(&bp[b]).unwrap_or(std::cmp::Ordering::Equal));
    let (mut a, mut b) = (T::zero(), T::zero());
    let mut tau = T::zero();
    for (k, &i) in order.iter().enumerate() {
        a += mu[i] * mu[i];
        b += mu[i] * v[i];
        tau = (T::one() - b) / a;
        if k + 1 == order.len() || tau <= bp[order[k + 1]] {
            break;
        }
    }
    v.iter().zip(mu).map(|(&vi, &mi)| (vi + tau * mi).max(T::zero())).collect()
}

fn check_mu<T: Scalar>(stats: &AssetStats<T>) -> Result<(), SolverError> {
    if stats.n_assets() == 0 {
        return Err(SolverError::Empty);
    }
    match stats.mu.iter().position(|&m| !(m > T::zero())) {
        Some(i) => Err(SolverError::NonPositiveMu(stats.assets[i].clone())),
        None => Ok(()),
    }
}
