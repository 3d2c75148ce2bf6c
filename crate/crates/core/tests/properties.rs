use chrono::NaiveDate;
use nalgebra::DMatrix;
use proptest::prelude::*;
use sharpe_qubo::formulations::{proposed_constraint, proposed_objective, proxy_discretization, FormulationKind, FormulationSpec};
use sharpe_qubo::market_data::{annualized_stats, clean_panel, log_returns, simple_returns, AssetStats, PricePanel};
use sharpe_qubo::qubo::{ising_to_qubo, qubo_to_ising, QuboMatrix};
use sharpe_qubo::Matrix;

fn dates(n: usize) -> Vec<NaiveDate> {
    let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    (0..n).map(|i| d0 + chrono::Days::new(i as u64)).collect()
}

fn dense_panel(prices: Vec<Vec<f64>>) -> PricePanel<f64> {
    let cols = prices[0].len();
    let rows: Vec<Vec<Option<f64>>> = prices.into_iter().map(|r| r.into_iter().map(Some).collect()).collect();
    PricePanel::new(dates(rows.len()), (0..cols).map(|i| format!("P{i}")).collect(), rows).unwrap()
}

fn price_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..5, 3usize..30).prop_flat_map(|(cols, rows)| {
        prop::collection::vec(prop::collection::vec(1.0f64..500.0, cols), rows)
    })
}

fn upper_triplets(n: usize) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    prop::collection::vec(-5.0f64..5.0, pairs.len())
        .prop_map(move |vals| pairs.iter().zip(vals).map(|(&(i, j), v)| (i, j, v)).collect())
}

fn spd_stats(n: usize) -> impl Strategy<Value = AssetStats<f64>> {
    (prop::collection::vec(-0.3f64..0.3, n * n), prop::collection::vec(0.01f64..0.4, n)).prop_map(move |(a, mu)| {
        let cov = Matrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum::<f64>() + if i == j { 0.02 } else { 0.0 }
        });
        AssetStats::from_mu_cov((0..n).map(|i| format!("A{i}")).collect(), mu, cov, 252).unwrap()
    })
}

fn all_bits(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..(1 << n)).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn log_returns_are_log_of_gross_simple(prices in price_rows()) {
        let panel = dense_panel(prices);
        let s = simple_returns(&panel).unwrap();
        let l = log_returns(&panel).unwrap();
        for (rs, rl) in s.returns.iter().zip(&l.returns) {
            for (a, b) in rs.iter().zip(rl) {
                prop_assert!(((1.0 + a).ln() - b).abs() < 1e-12);
                prop_assert!((b.exp() - 1.0 - a).abs() < 1e-9 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn covariance_is_symmetric_psd(prices in price_rows()) {
        let panel = dense_panel(prices);
        let r = simple_returns(&panel).unwrap();
        prop_assume!(r.n_rows() >= 2);
        if let Ok(stats) = annualized_stats(&r, 252) {
            let n = stats.n_assets();
            prop_assert_eq!(stats.cov.max_asymmetry(), 0.0);
            let m = DMatrix::from_fn(n, n, |i, j| stats.cov[(i, j)]);
            let scale = stats.cov.trace().max(1e-300);
            for ev in m.symmetric_eigenvalues().iter() {
                prop_assert!(*ev >= -1e-10 * scale, "eigenvalue {}", ev);
            }
        }
    }

    #[test]
    fn cleaning_is_idempotent(
        prices in price_rows(),
        holes in prop::collection::vec(any::<bool>(), 150),
        max_gap in 1usize..3,
    ) {
        let cols = prices[0].len();
        let rows: Vec<Vec<Option<f64>>> = prices
            .iter()
            .enumerate()
            .map(|(t, r)| r.iter().enumerate().map(|(j, &p)| (!holes[(t * cols + j) % holes.len()]).then_some(p)).collect())
            .collect();
        let Ok(panel) = PricePanel::new(dates(rows.len()), (0..cols).map(|i| format!("P{i}")).collect(), rows) else {
            return Ok(());
        };
        if let Ok(once) = clean_panel(&panel, max_gap) {
            prop_assert!(once.is_dense());
            let twice = clean_panel(&once, max_gap).unwrap();
            prop_assert_eq!(once, twice);
        }
    }

    #[test]
    fn ising_round_trip_preserves_energy(t in upper_triplets(6), offset in -3.0f64..3.0) {
        let q = QuboMatrix::from_triplets(6, offset, t).unwrap();
        let ising = qubo_to_ising(&q);
        let back = ising_to_qubo(&ising);
        for x in all_bits(6) {
            let e = q.evaluate(&x).unwrap();
            let spins: Vec<i8> = x.iter().map(|&b| if b { 1 } else { -1 }).collect();
            prop_assert!((ising.energy(&spins).unwrap() - e).abs() < 1e-12);
            prop_assert!((back.evaluate(&x).unwrap() - e).abs() < 1e-12);
        }
    }

    #[test]
    fn models_are_linear_in_lambdas(stats in spd_stats(2), l0 in 0.01f64..5.0, l1 in 0.0f64..500.0) {
        let spec = FormulationSpec { bits: Some(5), ..FormulationSpec::new(FormulationKind::Proposed) };
        let disc = spec.discretization(&stats).unwrap();
        let h0 = proposed_objective(&stats, &disc).unwrap();
        let h1 = proposed_constraint(&stats, &disc).unwrap();
        let model = spec.build(&stats, l0, l1).unwrap();
        for x in all_bits(10) {
            let direct = model.matrix.evaluate(&x).unwrap();
            let parts = l0 * h0.evaluate(&x).unwrap() + l1 * h1.evaluate(&x).unwrap();
            prop_assert!((direct - parts).abs() < 1e-9 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn proxy_weights_sum_to_block_total(bits in prop::collection::vec(any::<bool>(), 9)) {
        let d = proxy_discretization::<f64>(9).unwrap();
        let w = d.decode_block(&bits);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&w));
        let expected: f64 = bits.iter().zip(d.coeffs()).filter(|(b, _)| **b).map(|(_, c)| c).sum();
        prop_assert_eq!(w, expected);
    }
}
