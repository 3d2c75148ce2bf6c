use serde::{Deserialize, Serialize};

use super::{Discretization, FormulationError, FormulationKind};
use crate::market_data::AssetStats;
use crate::qubo::serde_bits;
use crate::scalar::{dot, Scalar};

/// Default tolerance on `|sum w - 1|` for the proxy formulation. The proxy
/// coefficients sum to one, so the constraint is exactly attainable.
pub const PROXY_TOLERANCE: f64 = 1e-9;

/// A decoded bitstring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PortfolioSolution<T> {
    #[serde(with = "serde_bits")]
    pub bits: Vec<bool>,
    pub weights: Vec<T>,
    /// Discretized `y` (proposed formulation only).
    pub y: Option<Vec<T>>,
    /// `sum(y)` (proposed formulation only).
    pub k: Option<T>,
    pub sharpe: Option<T>,
    pub feasible: bool,
    pub residual: T,
    pub energy: Option<T>,
}

impl<T: Scalar> PortfolioSolution<T> {
    /// Number of strictly positive weights.
    pub fn asset_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > T::zero()).count()
    }
}

fn check_len(bits: &[bool], disc: &Discretization<impl Scalar>, n_assets: usize) -> Result<(), FormulationError> {
    let expected = n_assets * disc.bits_per_asset();
    if bits.len() != expected {
        return Err(FormulationError::LengthMismatch { expected, found: bits.len() });
    }
    Ok(())
}

/// `w_i = sum_k d_k x_ik`; residual `|sum w - 1|`.
pub fn decode_proxy<T: Scalar>(
    bits: &[bool],
    disc: &Discretization<T>,
    assets: &[String],
) -> Result<PortfolioSolution<T>, FormulationError> {
    check_len(bits, disc, assets.len())?;
    let weights = disc.decode(bits);
    let residual = (weights.iter().copied().sum::<T>() - T::one()).abs();
    let mut sol = PortfolioSolution {
        bits: bits.to_vec(),
        weights,
        y: None,
        k: None,
        sharpe: None,
        feasible: false,
        residual,
        energy: None,
    };
    sol.feasible = feasibility(&sol, FormulationKind::Proxy, T::lit(PROXY_TOLERANCE));
    Ok(sol)
}

/// `y_i = sum_k c_k x_ik`, `k = sum y`, `w = y / k`; residual `|mu^T y - 1|`.
/// With `k = 0` the weights are all zero and the solution is infeasible.
pub fn decode_proposed<T: Scalar>(
    bits: &[bool],
    disc: &Discretization<T>,
    stats: &AssetStats<T>,
) -> Result<PortfolioSolution<T>, FormulationError> {
    check_len(bits, disc, stats.n_assets())?;
    let y = disc.decode(bits);
    let k: T = y.iter().copied().sum();
    let residual = (dot(&stats.mu, &y) - T::one()).abs();
    let weights = if k > T::zero() { y.iter().map(|&v| v / k).collect() } else { vec![T::zero(); y.len()] };
    let sharpe = if k > T::zero() { sharpe_ratio(&weights, stats).ok() } else { None };
    let mut sol = PortfolioSolution {
        bits: bits.to_vec(),
        weights,
        y: Some(y),
        k: Some(k),
        sharpe,
        feasible: false,
        residual,
        energy: None,
    };
    sol.feasible = feasibility(&sol, FormulationKind::Proposed, proposed_tolerance(disc, &stats.mu));
    Ok(sol)
}

/// Smallest discretization coefficient times smallest expected return.
pub fn proposed_tolerance<T: Scalar>(disc: &Discretization<T>, mu: &[T]) -> T {
    disc.min_coeff() * mu.iter().copied().fold(T::infinity(), T::min)
}

/// Residual within `tolerance`; the proposed formulation additionally needs
/// a nonzero `y`.
pub fn feasibility<T: Scalar>(sol: &PortfolioSolution<T>, kind: FormulationKind, tolerance: T) -> bool {
    let within = sol.residual <= tolerance;
    match kind {
        FormulationKind::Proxy => within,
        FormulationKind::Proposed => within && sol.k.is_some_and(|k| k > T::zero()),
    }
}

/// `w^T mu / sqrt(w^T Sigma w)` with a zero risk-free rate.
pub fn sharpe_ratio<T: Scalar>(weights: &[T], stats: &AssetStats<T>) -> Result<T, FormulationError> {
    if weights.len() != stats.n_assets() {
        return Err(FormulationError::Dimension(format!(
            "{} weights for {} assets",
            weights.len(),
            stats.n_assets()
        )));
    }
    if weights.iter().all(|&w| w == T::zero()) {
        return Err(FormulationError::ZeroWeights);
    }
    let var = stats.cov.quad_form(weights);
    if !(var > T::zero()) {
        return Err(FormulationError::ZeroVariance);
    }
    Ok(dot(weights, &stats.mu) / var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::{proposed_discretization, proxy_discretization};
    use crate::linalg::Matrix;

    fn stats(mu: &[f64], var: &[f64]) -> AssetStats<f64> {
        AssetStats::from_mu_cov(
            (0..mu.len()).map(|i| format!("A{i}")).collect(),
            mu.to_vec(),
            Matrix::diagonal(var),
            252,
        )
        .unwrap()
    }

    #[test]
    fn proxy_full_block() {
        let d = proxy_discretization::<f64>(9).unwrap();
        let sol = decode_proxy(&[true; 9], &d, &["A".into()]).unwrap();
        assert_eq!(sol.weights, vec![1.0]);
        assert_eq!(sol.residual, 0.0);
        assert!(sol.feasible);
    }

    #[test]
    fn proxy_empty() {
        let d = proxy_discretization::<f64>(9).unwrap();
        let sol = decode_proxy(&[false; 18], &d, &["A".into(), "B".into()]).unwrap();
        assert_eq!(sol.weights, vec![0.0, 0.0]);
        assert_eq!(sol.residual, 1.0);
        assert!(!sol.feasible);
        assert!(matches!(
            decode_proxy(&[false; 17], &d, &["A".into(), "B".into()]),
            Err(FormulationError::LengthMismatch { expected: 18, found: 17 })
        ));
    }

    #[test]
    fn proxy_first_and_last() {
        let d = proxy_discretization::<f64>(9).unwrap();
        let mut bits = [false; 9];
        bits[0] = true;
        bits[8] = true;
        let sol = decode_proxy(&bits, &d, &["A".into()]).unwrap();
        assert!((sol.weights[0] - 0.492).abs() < 1e-15);
    }

    #[test]
    fn proposed_zero_bits() {
        let s = stats(&[0.1], &[0.04]);
        let d = proposed_discretization(0.1, 0.1, 3).unwrap();
        let sol = decode_proposed(&[false; 3], &d, &s).unwrap();
        assert_eq!(sol.k, Some(0.0));
        assert_eq!(sol.residual, 1.0);
        assert!(!sol.feasible);
        assert!(sol.sharpe.is_none());
    }

    #[test]
    fn proposed_exact_budget() {
        // every bit set decodes to the upper bound 1/mu = 102.4, so mu * y = 1
        let mu = 1.0 / 102.4;
        let s = stats(&[mu], &[0.04]);
        let h = crate::formulations::max_proposed_bits(mu, 0.1, 12);
        let d = proposed_discretization(mu, 0.1, h).unwrap();
        let sol = decode_proposed(&vec![true; h], &d, &s).unwrap();
        assert!((sol.y.as_ref().unwrap()[0] - 102.4).abs() < 1e-12);
        assert!(sol.residual < 1e-12, "{}", sol.residual);
        assert_eq!(sol.weights, vec![1.0]);
        assert!(sol.feasible);
    }

    #[test]
    fn proposed_equal_y_split_evenly() {
        let s = stats(&[0.1, 0.2], &[0.04, 0.04]);
        let d = proposed_discretization(0.1, 0.1, 3).unwrap();
        let sol = decode_proposed(&[true, true, false, true, true, false], &d, &s).unwrap();
        assert_eq!(sol.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn tolerance_rule() {
        let mut sol = PortfolioSolution {
            bits: vec![true],
            weights: vec![1.0],
            y: Some(vec![1.0]),
            k: Some(1.0),
            sharpe: None,
            feasible: false,
            residual: 2.0e-4,
            energy: None,
        };
        assert!(feasibility(&sol, FormulationKind::Proposed, 2.45e-4));
        assert!(!feasibility(&sol, FormulationKind::Proposed, 1.0e-4));
        sol.k = Some(0.0);
        assert!(!feasibility(&sol, FormulationKind::Proposed, 1.0));

        let d = proposed_discretization(0.00245, 0.1, 12).unwrap();
        assert!((proposed_tolerance(&d, &[0.00245, 0.3]) - 2.45e-4f64).abs() < 1e-15);
    }

    #[test]
    fn sharpe_values() {
        let s = stats(&[0.1, 0.2], &[0.04, 0.04]);
        let sr = sharpe_ratio(&[0.5, 0.5], &s).unwrap();
        assert!((sr - 0.15 / 0.02f64.sqrt()).abs() < 1e-12);
        assert!((sharpe_ratio(&[0.0, 1.0], &s).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(sharpe_ratio(&[0.0, 0.0], &s), Err(FormulationError::ZeroWeights)));
        let a = sharpe_ratio(&[0.3, 0.9], &s).unwrap();
        let b = sharpe_ratio(&[0.3 * 7.3, 0.9 * 7.3], &s).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn solution_json_fields() {
        let s = stats(&[0.1], &[0.04]);
        let d = proposed_discretization(0.1, 0.1, 3).unwrap();
        let sol = decode_proposed(&[true, false, true], &d, &s).unwrap();
        let v = serde_json::to_value(&sol).unwrap();
        assert_eq!(v["bits"], "101");
        for key in ["bits", "weights", "y", "k", "sharpe", "feasible", "residual", "energy"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
