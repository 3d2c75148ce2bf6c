use serde::{Deserialize, Serialize};

use super::FormulationError;
use crate::scalar::Scalar;

/// Default number of bits per asset for the proxy formulation.
pub const PROXY_BITS: usize = 9;
/// Default number of bits per asset for the proposed formulation.
pub const PROPOSED_BITS: usize = 12;
/// Default resolution of the proposed formulation's `y` variables.
pub const PROPOSED_STEP: f64 = 0.1;

/// Powers-of-two coefficients mapping a block of bits to a continuous value.
/// The last coefficient tops the block up to `max_value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Discretization<T> {
    coeffs: Vec<T>,
    bits_per_asset: usize,
    max_value: T,
}

impl<T: Scalar> Discretization<T> {
    pub fn new(coeffs: Vec<T>, max_value: T) -> Result<Self, FormulationError> {
        if coeffs.is_empty() {
            return Err(FormulationError::Discretization("no coefficients".into()));
        }
        if let Some(c) = coeffs.iter().find(|&&c| !(c > T::zero()) || !c.is_finite()) {
            return Err(FormulationError::Discretization(format!("coefficient {c} is not positive")));
        }
        let sum: T = coeffs.iter().copied().sum();
        if (sum - max_value).abs() > T::lit(1e-9) * (T::one() + max_value.abs()) {
            return Err(FormulationError::Discretization(format!(
                "coefficients sum to {sum}, expected {max_value}"
            )));
        }
        Ok(Self { bits_per_asset: coeffs.len(), coeffs, max_value })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn bits_per_asset(&self) -> usize {
        self.bits_per_asset
    }

    pub fn max_value(&self) -> T {
        self.max_value
    }

    pub fn min_coeff(&self) -> T {
        self.coeffs.iter().copied().fold(T::infinity(), T::min)
    }

    /// Continuous value of one asset's bit block.
    pub fn decode_block(&self, block: &[bool]) -> T {
        self.coeffs.iter().zip(block).filter(|(_, &b)| b).map(|(&c, _)| c).sum()
    }

    /// Decodes a full bitstring, one value per asset.
    pub fn decode(&self, bits: &[bool]) -> Vec<T> {
        bits.chunks(self.bits_per_asset).map(|b| self.decode_block(b)).collect()
    }
}

/// `d_k = 2^(k-1) / 500` for `k < K`, and `d_K = 1 - sum`. Weights are
/// representable on a 0.002 grid over `[0, 1]`.
pub fn proxy_discretization<T: Scalar>(bits: usize) -> Result<Discretization<T>, FormulationError> {
    if bits < 2 {
        return Err(FormulationError::Discretization("proxy discretization needs at least 2 bits".into()));
    }
    // partial sum is (2^(K-1) - 1) / 500; computing the remainder in integer
    // units keeps every coefficient correctly rounded
    let partial_units = 1u64.checked_shl(bits as u32 - 1).map(|p| p - 1).filter(|&p| p < 500);
    let Some(partial_units) = partial_units else {
        return Err(FormulationError::Discretization(format!(
            "{bits} bits leave no room for the residual coefficient"
        )));
    };
    let denom = T::lit(500.0);
    let mut coeffs: Vec<T> = (0..bits - 1).map(|k| T::lit((1u64 << k) as f64) / denom).collect();
    coeffs.push(T::lit((500 - partial_units) as f64) / denom);
    Discretization::new(coeffs, T::one())
}

/// `c_k = step * 2^(k-1)` for `k < H`, and `c_H = 1/mu_min - sum`, so every
/// `y_i` is representable up to its upper bound `1/mu_min`.
pub fn proposed_discretization<T: Scalar>(
    mu_min: T,
    step: T,
    bits: usize,
) -> Result<Discretization<T>, FormulationError> {
    if !(mu_min > T::zero()) || !mu_min.is_finite() {
        return Err(FormulationError::NonPositiveMu { asset: None, mu: mu_min.as_f64() });
    }
    if !(step > T::zero()) || bits < 1 {
        return Err(FormulationError::Discretization("step must be positive and bits at least 1".into()));
    }
    let bound = T::one() / mu_min;
    let mut coeffs: Vec<T> = (0..bits - 1).map(|k| step * T::lit(2f64.powi(k as i32))).collect();
    let partial: T = coeffs.iter().copied().sum();
    if partial >= bound {
        return Err(FormulationError::BoundExceeded { partial: partial.as_f64(), bound: bound.as_f64() });
    }
    coeffs.push(bound - partial);
    Discretization::new(coeffs, bound)
}

/// Largest `H <= cap` for which [`proposed_discretization`] is valid.
pub fn max_proposed_bits<T: Scalar>(mu_min: T, step: T, cap: usize) -> usize {
    let bound = (T::one() / mu_min).as_f64();
    let step = step.as_f64();
    (1..=cap.max(1))
        .take_while(|&h| step * (2f64.powi(h as i32 - 1) - 1.0) < bound)
        .last()
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proxy_nine_bits() {
        let d = proxy_discretization::<f64>(9).unwrap();
        assert_eq!(
            d.coeffs(),
            [0.002, 0.004, 0.008, 0.016, 0.032, 0.064, 0.128, 0.256, 0.49]
        );
        assert_eq!(d.max_value(), 1.0);
        assert!((d.coeffs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn proxy_two_bits() {
        assert_eq!(proxy_discretization::<f64>(2).unwrap().coeffs(), [0.002, 0.998]);
    }

    #[test]
    fn proxy_too_many_bits() {
        assert!(proxy_discretization::<f64>(10).is_err());
        assert!(proxy_discretization::<f64>(1).is_err());
    }

    #[test]
    fn proposed_reference_bound() {
        let d = proposed_discretization(0.00245f64, 0.1, 12).unwrap();
        let expect = [0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8, 25.6, 51.2, 102.4];
        for (c, e) in d.coeffs().iter().zip(expect) {
            assert!((c - e).abs() < 1e-12);
        }
        let partial: f64 = d.coeffs()[..11].iter().sum();
        assert!((partial - 204.7).abs() < 1e-10);
        assert!((d.coeffs()[11] - 203.463_265_306_122_4).abs() < 1e-9);
        assert!((d.max_value() - 408.163_265_306_122_4).abs() < 1e-9);
    }

    #[test]
    fn proposed_small() {
        let d = proposed_discretization(1.0f64, 0.1, 2).unwrap();
        assert_eq!(d.coeffs().len(), 2);
        assert!((d.coeffs()[0] - 0.1).abs() < 1e-15 && (d.coeffs()[1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn proposed_bound_violation() {
        assert!(matches!(
            proposed_discretization(0.1f64, 0.1, 12),
            Err(FormulationError::BoundExceeded { .. })
        ));
        assert!(proposed_discretization(0.0f64, 0.1, 12).is_err());
    }

    #[test]
    fn bit_cap_matches_validity() {
        for &mu in &[0.00245f64, 0.05, 0.3, 0.99, 1e-4] {
            let h = max_proposed_bits(mu, 0.1, 12);
            assert!(proposed_discretization(mu, 0.1, h).is_ok(), "mu {mu} h {h}");
            if h < 12 {
                assert!(proposed_discretization(mu, 0.1, h + 1).is_err(), "mu {mu} h {h}");
            }
        }
        assert_eq!(max_proposed_bits(0.00245f64, 0.1, 12), 12);
    }

    #[test]
    fn decode_blocks() {
        let d = proxy_discretization::<f64>(9).unwrap();
        let mut bits = vec![false; 18];
        bits[0] = true;
        bits[8] = true;
        bits[9..18].iter_mut().for_each(|b| *b = true);
        let w = d.decode(&bits);
        assert!((w[0] - 0.492).abs() < 1e-15);
        assert_eq!(w[1], 1.0);
    }
}
