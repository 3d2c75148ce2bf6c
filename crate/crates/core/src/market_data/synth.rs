use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, PricePanel};
use crate::scalar::Scalar;

/// Parameters of the seeded one-factor geometric Brownian motion generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub assets: usize,
    pub days: usize,
    pub seed: u64,
    /// Range of annual drifts, drawn uniformly per asset.
    pub drift: (f64, f64),
    /// Range of annual volatilities, drawn uniformly per asset.
    pub volatility: (f64, f64),
    /// Range of loadings on the common market factor.
    pub beta: (f64, f64),
    pub start: NaiveDate,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            assets: 10,
            days: 756,
            seed: 0,
            drift: (0.08, 0.30),
            volatility: (0.12, 0.30),
            beta: (0.2, 0.7),
            start: NaiveDate::from_ymd_opt(2013, 1, 2).expect("valid date"),
        }
    }
}

/// Dense business-day price panel with tickers `S000`, `S001`, ...
pub fn synthetic_panel<T: Scalar>(cfg: &SynthConfig) -> Result<PricePanel<T>, DataError> {
    if cfg.assets == 0 || cfg.days < 2 {
        return Err(DataError::InvalidArgument("synthetic panel needs at least one asset and two days".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dt = 1.0 / 252.0;
    let params: Vec<(f64, f64, f64, f64)> = (0..cfg.assets)
        .map(|_| {
            let drift = rng.random_range(cfg.drift.0..=cfg.drift.1);
            let vol = rng.random_range(cfg.volatility.0..=cfg.volatility.1);
            let beta = rng.random_range(cfg.beta.0..=cfg.beta.1);
            let p0 = rng.random_range(20.0..200.0);
            (drift, vol, beta, p0)
        })
        .collect();

    let mut level: Vec<f64> = params.iter().map(|p| p.3).collect();
    let mut prices = Vec::with_capacity(cfg.days);
    prices.push(level.iter().map(|&p| Some(T::lit(p))).collect::<Vec<_>>());
    for _ in 1..cfg.days {
        let market: f64 = rng.sample(StandardNormal);
        for (p, &(drift, vol, beta, _)) in level.iter_mut().zip(&params) {
            let own: f64 = rng.sample(StandardNormal);
            let shock = beta * market + (1.0 - beta * beta).sqrt() * own;
            *p *= ((drift - 0.5 * vol * vol) * dt + vol * dt.sqrt() * shock).exp();
        }
        prices.push(level.iter().map(|&p| Some(T::lit(p))).collect());
    }

    let mut dates = Vec::with_capacity(cfg.days);
    let mut d = cfg.start;
    while dates.len() < cfg.days {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(d);
        }
        d = d + Days::new(1);
    }
    let assets = (0..cfg.assets).map(|i| format!("S{i:03}")).collect();
    PricePanel::new(dates, assets, prices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_dense() {
        let cfg = SynthConfig { assets: 4, days: 30, seed: 9, ..Default::default() };
        let a: PricePanel<f64> = synthetic_panel(&cfg).unwrap();
        let b: PricePanel<f64> = synthetic_panel(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.is_dense());
        assert_eq!((a.n_dates(), a.n_assets()), (30, 4));
        assert!(a.dates().iter().all(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)));
    }
}
