use serde::{Deserialize, Serialize};

use super::{DataError, ReturnPanel};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Trading days per year.
pub const DEFAULT_FREQUENCY: u32 = 252;

/// Annualized per-asset statistics.
///
/// `mu` is per year, `sigma` per square-root year; `cov` and `corr` are
/// indexed in `assets` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AssetStats<T> {
    pub assets: Vec<String>,
    pub mu: Vec<T>,
    pub sigma: Vec<T>,
    pub cov: Matrix<T>,
    pub corr: Matrix<T>,
    pub frequency: u32,
}

impl<T: Scalar> AssetStats<T> {
    /// Builds stats from expected returns and a covariance matrix, deriving
    /// volatilities and correlations.
    pub fn from_mu_cov(
        assets: Vec<String>,
        mu: Vec<T>,
        cov: Matrix<T>,
        frequency: u32,
    ) -> Result<Self, DataError> {
        let n = assets.len();
        if mu.len() != n || cov.rows() != n || cov.cols() != n {
            return Err(DataError::Dimension(format!(
                "{n} assets, {} expected returns, {}x{} covariance",
                mu.len(),
                cov.rows(),
                cov.cols()
            )));
        }
        let mut sigma = Vec::with_capacity(n);
        for (i, name) in assets.iter().enumerate() {
            let v = cov[(i, i)];
            if !(v > T::zero()) || !v.is_finite() {
                return Err(DataError::DegenerateAsset(name.clone()));
            }
            sigma.push(v.sqrt());
        }
        let corr = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                T::one()
            } else {
                (cov[(i, j)] / (sigma[i] * sigma[j])).max(-T::one()).min(T::one())
            }
        });
        Ok(Self { assets, mu, sigma, cov, corr, frequency })
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn mu_min(&self) -> Option<T> {
        self.mu.iter().copied().reduce(T::min)
    }

    /// Restricts the statistics to the given asset indices, in order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            assets: idx.iter().map(|&i| self.assets[i].clone()).collect(),
            mu: idx.iter().map(|&i| self.mu[i]).collect(),
            sigma: idx.iter().map(|&i| self.sigma[i]).collect(),
            cov: self.cov.select(idx),
            corr: self.corr.select(idx),
            frequency: self.frequency,
        }
    }

    /// Checks the structural invariants; used after deserializing.
    pub fn validate(&self) -> Result<(), DataError> {
        let n = self.n_assets();
        let dims_ok = self.mu.len() == n
            && self.sigma.len() == n
            && self.cov.rows() == n
            && self.cov.cols() == n
            && self.corr.rows() == n
            && self.corr.cols() == n;
        if !dims_ok {
            return Err(DataError::Dimension("stats vectors and matrices disagree with asset list".into()));
        }
        let tol = T::lit(1e-9);
        for i in 0..n {
            let var = self.cov[(i, i)];
            if !(self.sigma[i] > T::zero()) {
                return Err(DataError::DegenerateAsset(self.assets[i].clone()));
            }
            if (var - self.sigma[i] * self.sigma[i]).abs() > tol * (T::one() + var) {
                return Err(DataError::Dimension(format!(
                    "sigma of {} disagrees with covariance diagonal",
                    self.assets[i]
                )));
            }
        }
        if self.cov.max_asymmetry() > tol {
            return Err(DataError::Dimension("covariance is not symmetric".into()));
        }
        Ok(())
    }
}

/// Sample mean and sample covariance (denominator `n - 1`), both scaled by
/// `frequency`.
pub fn annualized_stats<T: Scalar>(
    returns: &ReturnPanel<T>,
    frequency: u32,
) -> Result<AssetStats<T>, DataError> {
    let rows = returns.n_rows();
    if rows < 2 {
        return Err(DataError::TooFewRows { need: 2, got: rows });
    }
    if frequency < 1 {
        return Err(DataError::InvalidArgument("frequency must be at least 1".into()));
    }
    let n = returns.n_assets();
    let f = T::from_u32(frequency).expect("frequency fits scalar");
    let count = T::from_count(rows);

    let means: Vec<T> = (0..n)
        .map(|j| returns.returns.iter().map(|r| r[j]).sum::<T>() / count)
        .collect();

    let mut cov = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: T = returns
                .returns
                .iter()
                .map(|r| (r[i] - means[i]) * (r[j] - means[j]))
                .sum();
            let v = s / (count - T::one()) * f;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let mu = means.into_iter().map(|m| m * f).collect();
    AssetStats::from_mu_cov(returns.assets.clone(), mu, cov, frequency)
}

/// Keeps only assets with strictly positive expected return.
pub fn filter_positive_mu<T: Scalar>(stats: &AssetStats<T>) -> Result<AssetStats<T>, DataError> {
    let keep: Vec<usize> = (0..stats.n_assets()).filter(|&i| stats.mu[i] > T::zero()).collect();
    if keep.is_empty() {
        return Err(DataError::NoInvestableAssets);
    }
    Ok(stats.subset(&keep))
}
