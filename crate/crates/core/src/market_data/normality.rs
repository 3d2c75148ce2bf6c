use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{DataError, ReturnKind, ReturnPanel};
use crate::scalar::Scalar;

const MIN_ROWS: usize = 8;

/// Jarque-Bera statistics per asset plus a pooled score (their mean).
/// Lower is closer to Gaussian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NormalityScore<T> {
    pub kind: ReturnKind,
    pub assets: Vec<String>,
    pub per_asset: Vec<T>,
    pub pooled: T,
}

/// `n/6 * (S^2 + (K - 3)^2 / 4)` with population skewness `S` and kurtosis `K`.
/// `None` when the sample has zero variance.
pub fn jarque_bera<T: Scalar>(sample: &[T]) -> Option<T> {
    let n = T::from_count(sample.len());
    let mean = sample.iter().copied().sum::<T>() / n;
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &x in sample {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if !(m2 > T::zero()) {
        return None;
    }
    let skew = m3 / m2.powf(T::lit(1.5));
    let excess = m4 / (m2 * m2) - T::lit(3.0);
    Some(n / T::lit(6.0) * (skew * skew + excess * excess / T::lit(4.0)))
}

pub fn normality_score<T: Scalar>(returns: &ReturnPanel<T>) -> Result<NormalityScore<T>, DataError> {
    if returns.n_rows() < MIN_ROWS {
        return Err(DataError::TooFewRows { need: MIN_ROWS, got: returns.n_rows() });
    }
    let mut per_asset = Vec::with_capacity(returns.n_assets());
    for j in 0..returns.n_assets() {
        let jb = jarque_bera(&returns.column(j))
            .ok_or_else(|| DataError::DegenerateAsset(returns.assets[j].clone()))?;
        per_asset.push(jb);
    }
    let pooled = per_asset.iter().copied().sum::<T>() / T::from_count(per_asset.len().max(1));
    Ok(NormalityScore { kind: returns.kind, assets: returns.assets.clone(), per_asset, pooled })
}

/// Theoretical standard-normal quantiles paired with empirical quantiles of
/// the standardized sample, at `points` evenly spaced plotting positions.
pub fn qq_points<T: Scalar>(sample: &[T], points: usize) -> Vec<(f64, f64)> {
    let n = sample.len();
    if n < 2 || points == 0 {
        return Vec::new();
    }
    let xs: Vec<f64> = sample.iter().map(|v| v.as_f64()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Vec::new();
    }
    let mut z: Vec<f64> = xs.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);

    let normal = Normal::standard();
    let points = points.min(n);
    (0..points)
        .map(|k| {
            let idx = if points == 1 { n / 2 } else { k * (n - 1) / (points - 1) };
            let p = (idx as f64 + 0.5) / n as f64;
            (normal.inverse_cdf(p), z[idx])
        })
        .collect()
}
