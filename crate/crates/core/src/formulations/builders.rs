use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{
    max_proposed_bits, proposed_discretization, proxy_discretization, solution, Discretization,
    FormulationError, FormulationKind, PortfolioSolution, PROPOSED_BITS, PROPOSED_STEP, PROXY_BITS,
};
use crate::linalg::Matrix;
use crate::market_data::AssetStats;
use crate::qubo::QuboMatrix;
use crate::scalar::Scalar;

/// A built QUBO together with everything needed to decode and score its
/// solutions.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboModel<T> {
    pub matrix: QuboMatrix<T>,
    pub kind: FormulationKind,
    pub discretization: Discretization<T>,
    pub lambda0: T,
    pub lambda1: T,
    pub stats: AssetStats<T>,
    /// Smallest expected return; set for the proposed formulation only.
    pub mu_min: Option<T>,
}

impl<T: Scalar> QuboModel<T> {
    pub fn n_variables(&self) -> usize {
        self.matrix.n()
    }

    pub fn assets(&self) -> &[String] {
        &self.stats.assets
    }

    /// Feasibility tolerance used unless the caller overrides it.
    pub fn default_tolerance(&self) -> T {
        match self.kind {
            FormulationKind::Proxy => T::lit(solution::PROXY_TOLERANCE),
            FormulationKind::Proposed => {
                solution::proposed_tolerance(&self.discretization, &self.stats.mu)
            }
        }
    }

    /// Decodes `bits`, scores the portfolio and records the QUBO energy.
    pub fn decode(&self, bits: &[bool]) -> Result<PortfolioSolution<T>, FormulationError> {
        self.decode_with_tolerance(bits, self.default_tolerance())
    }

    pub fn decode_with_tolerance(
        &self,
        bits: &[bool],
        tolerance: T,
    ) -> Result<PortfolioSolution<T>, FormulationError> {
        let mut sol = match self.kind {
            FormulationKind::Proxy => {
                let mut s = solution::decode_proxy(bits, &self.discretization, &self.stats.assets)?;
                s.sharpe = solution::sharpe_ratio(&s.weights, &self.stats).ok();
                s
            }
            FormulationKind::Proposed => {
                solution::decode_proposed(bits, &self.discretization, &self.stats)?
            }
        };
        sol.feasible = solution::feasibility(&sol, self.kind, tolerance);
        sol.energy = Some(self.matrix.evaluate(bits)?);
        Ok(sol)
    }
}

/// Which formulation to build and how to discretize it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulationSpec {
    pub kind: FormulationKind,
    /// Bits per asset. For the proposed formulation `None` means the largest
    /// count up to 12 that fits under `1/mu_min`.
    pub bits: Option<usize>,
    /// Resolution of `y` (proposed only).
    pub step: f64,
}

impl FormulationSpec {
    pub fn new(kind: FormulationKind) -> Self {
        Self { kind, bits: None, step: PROPOSED_STEP }
    }

    pub fn discretization<T: Scalar>(
        &self,
        stats: &AssetStats<T>,
    ) -> Result<Discretization<T>, FormulationError> {
        match self.kind {
            FormulationKind::Proxy => proxy_discretization(self.bits.unwrap_or(PROXY_BITS)),
            FormulationKind::Proposed => {
                let mu_min = checked_mu_min(stats)?;
                let step = T::lit(self.step);
                let bits = self
                    .bits
                    .unwrap_or_else(|| max_proposed_bits(mu_min, step, PROPOSED_BITS));
                proposed_discretization(mu_min, step, bits)
            }
        }
    }

    pub fn build<T: Scalar>(
        &self,
        stats: &AssetStats<T>,
        lambda0: T,
        lambda1: T,
    ) -> Result<QuboModel<T>, FormulationError> {
        let disc = self.discretization(stats)?;
        match self.kind {
            FormulationKind::Proxy => build_proxy(stats, &disc, lambda0, lambda1),
            FormulationKind::Proposed => build_proposed(stats, &disc, lambda0, lambda1),
        }
    }
}

/// QUBO over `N * K` bits for `sum_ij quad_ij v_i v_j + sum_i linear_i v_i + constant`,
/// where `v_i = sum_k c_k x_ik` and bit `(i, k)` has index `i * K + k`.
/// `quad` must be symmetric.
pub fn discretized_quadratic<T: Scalar>(
    quad: &Matrix<T>,
    linear: &[T],
    constant: T,
    disc: &Discretization<T>,
) -> Result<QuboMatrix<T>, FormulationError> {
    let n_assets = linear.len();
    if quad.rows() != n_assets || quad.cols() != n_assets {
        return Err(FormulationError::Dimension(format!(
            "{}x{} quadratic form for {n_assets} assets",
            quad.rows(),
            quad.cols()
        )));
    }
    let c = disc.coeffs();
    let k = c.len();
    let two = T::lit(2.0);
    let m = QuboMatrix::from_upper_rows(n_assets * k, constant, |p, row| {
        let (i, a) = (p / k, p % k);
        row.push((p, quad[(i, i)] * c[a] * c[a] + linear[i] * c[a]));
        for b in (a + 1)..k {
            row.push((i * k + b, two * quad[(i, i)] * c[a] * c[b]));
        }
        for j in (i + 1)..n_assets {
            let q = two * quad[(i, j)] * c[a];
            for (b, &cb) in c.iter().enumerate() {
                row.push((j * k + b, q * cb));
            }
        }
    })?;
    Ok(m)
}

fn checked_lambdas<T: Scalar>(lambda0: T, lambda1: T) -> Result<(), FormulationError> {
    if !(lambda0 > T::zero()) || !(lambda1 >= T::zero()) || !lambda0.is_finite() || !lambda1.is_finite() {
        return Err(FormulationError::InvalidLambda {
            lambda0: lambda0.as_f64(),
            lambda1: lambda1.as_f64(),
        });
    }
    Ok(())
}

fn checked_mu_min<T: Scalar>(stats: &AssetStats<T>) -> Result<T, FormulationError> {
    if let Some(i) = (0..stats.n_assets()).find(|&i| !(stats.mu[i] > T::zero())) {
        return Err(FormulationError::NonPositiveMu {
            asset: Some(stats.assets[i].clone()),
            mu: stats.mu[i].as_f64(),
        });
    }
    stats.mu_min().ok_or_else(|| FormulationError::Dimension("no assets".into()))
}

fn check_stats<T: Scalar>(stats: &AssetStats<T>) -> Result<(), FormulationError> {
    let n = stats.n_assets();
    if n == 0 {
        return Err(FormulationError::Dimension("no assets".into()));
    }
    if stats.mu.len() != n || stats.sigma.len() != n || stats.cov.rows() != n || stats.corr.rows() != n {
        return Err(FormulationError::Dimension("stats vectors disagree with asset list".into()));
    }
    if let Some(i) = (0..n).find(|&i| !(stats.sigma[i] > T::zero())) {
        return Err(FormulationError::ZeroSigma(stats.assets[i].clone()));
    }
    Ok(())
}

/// `H0 = -sum_i (mu_i / sigma_i) w_i + sum_{i<j} rho_ij w_i w_j`.
pub fn proxy_objective<T: Scalar>(
    stats: &AssetStats<T>,
    disc: &Discretization<T>,
) -> Result<QuboMatrix<T>, FormulationError> {
    check_stats(stats)?;
    let (quad, linear, constant) = proxy_parts(stats, T::one(), T::zero());
    discretized_quadratic(&quad, &linear, constant, disc)
}

/// `H1 = (sum_i w_i - 1)^2`.
pub fn proxy_constraint<T: Scalar>(
    stats: &AssetStats<T>,
    disc: &Discretization<T>,
) -> Result<QuboMatrix<T>, FormulationError> {
    check_stats(stats)?;
    let (quad, linear, constant) = proxy_parts(stats, T::zero(), T::one());
    discretized_quadratic(&quad, &linear, constant, disc)
}

fn proxy_parts<T: Scalar>(stats: &AssetStats<T>, l0: T, l1: T) -> (Matrix<T>, Vec<T>, T) {
    let n = stats.n_assets();
    let half = T::lit(0.5);
    // sum_{i<j} rho_ij w_i w_j == sum_{i != j} (rho_ij / 2) w_i w_j
    let quad = Matrix::from_fn(n, n, |i, j| {
        let pair = if i == j { T::zero() } else { half * stats.corr[(i, j)] };
        l0 * pair + l1
    });
    let linear = (0..n)
        .map(|i| -l0 * stats.mu[i] / stats.sigma[i] - l1 * T::lit(2.0))
        .collect();
    (quad, linear, l1)
}

/// `lambda0 * H0 + lambda1 * H1` for the proxy formulation.
pub fn build_proxy<T: Scalar>(
    stats: &AssetStats<T>,
    disc: &Discretization<T>,
    lambda0: T,
    lambda1: T,
) -> Result<QuboModel<T>, FormulationError> {
    check_stats(stats)?;
    checked_lambdas(lambda0, lambda1)?;
    let (quad, linear, constant) = proxy_parts(stats, lambda0, lambda1);
    let matrix = discretized_quadratic(&quad, &linear, constant, disc)?;
    Ok(QuboModel {
        matrix,
        kind: FormulationKind::Proxy,
        discretization: disc.clone(),
        lambda0,
        lambda1,
        stats: stats.clone(),
        mu_min: None,
    })
}

/// `H0 = y^T Sigma y`.
pub fn proposed_objective<T: Scalar>(
    stats: &AssetStats<T>,
    disc: &Discretization<T>,
) -> Result<QuboMatrix<T>, FormulationError> {
    check_stats(stats)?;
    let (quad, linear, constant) = proposed_parts(stats, T::one(), T::zero());
    discretized_quadratic(&quad, &linear, constant, disc)
}

/// `H1 = (mu^T y - 1)^2`.
pub fn proposed_constraint<T: Scalar>(
    stats: &AssetStats<T>,
    disc: &Discretization<T>,
) -> Result<QuboMatrix<T>, FormulationError> {
    check_stats(stats)?;
    let (quad, linear, constant) = proposed_parts(stats, T::zero(), T::one());
    discretized_quadratic(&quad, &linear, constant, disc)
}

fn proposed_parts<T: Scalar>(stats: &AssetStats<T>, l0: T, l1: T) -> (Matrix<T>, Vec<T>, T) {
    let n = stats.n_assets();
    let quad = Matrix::from_fn(n, n, |i, j| {
        let cov = if i == j { stats.cov[(i, i)] } else { (stats.cov[(i, j)] + stats.cov[(j, i)]) * T::lit(0.5) };
        l0 * cov + l1 * stats.mu[i] * stats.mu[j]
    });
    let linear = stats.mu.iter().map(|&m| -l1 * T::lit(2.0) * m).collect();
    (quad, linear, l1)
}

/// `lambda0 * H0 + lambda1 * H1` for the proposed formulation (risk-free rate 0).
pub fn build_proposed<T: Scalar>(
    stats: &AssetStats<T>,
    disc: &Discretization<T>,
    lambda0: T,
    lambda1: T,
) -> Result<QuboModel<T>, FormulationError> {
    check_stats(stats)?;
    let mu_min = checked_mu_min(stats)?;
    checked_lambdas(lambda0, lambda1)?;
    let (quad, linear, constant) = proposed_parts(stats, lambda0, lambda1);
    let matrix = discretized_quadratic(&quad, &linear, constant, disc)?;
    Ok(QuboModel {
        matrix,
        kind: FormulationKind::Proposed,
        discretization: disc.clone(),
        lambda0,
        lambda1,
        stats: stats.clone(),
        mu_min: Some(mu_min),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct Metadata<T> {
    kind: FormulationKind,
    lambda0: T,
    lambda1: T,
    assets: Vec<String>,
    discretization: Discretization<T>,
    mu_min: Option<T>,
    stats: AssetStats<T>,
}

impl<T: Scalar> Serialize for QuboModel<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Entries<'a, T>(&'a QuboMatrix<T>);
        impl<T: Scalar> Serialize for Entries<'_, T> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.nnz()))?;
                for e in self.0.entries() {
                    seq.serialize_element(&e)?;
                }
                seq.end()
            }
        }
        let mut st = s.serialize_struct("QuboModel", 4)?;
        st.serialize_field("n", &self.matrix.n())?;
        st.serialize_field("offset", &self.matrix.offset())?;
        st.serialize_field("entries", &Entries(&self.matrix))?;
        st.serialize_field(
            "metadata",
            &Metadata {
                kind: self.kind,
                lambda0: self.lambda0,
                lambda1: self.lambda1,
                assets: self.stats.assets.clone(),
                discretization: self.discretization.clone(),
                mu_min: self.mu_min,
                stats: self.stats.clone(),
            },
        )?;
        st.end()
    }
}

impl<'de, T: Scalar> Deserialize<'de> for QuboModel<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;

        #[derive(Deserialize)]
        #[serde(bound = "T: Scalar")]
        struct Raw<T> {
            n: usize,
            offset: T,
            entries: Vec<(usize, usize, T)>,
            metadata: Metadata<T>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        let meta = raw.metadata;
        if meta.assets != meta.stats.assets {
            return Err(D::Error::custom("metadata asset list disagrees with embedded stats"));
        }
        if raw.n != meta.assets.len() * meta.discretization.bits_per_asset() {
            return Err(D::Error::custom(format!(
                "{} variables for {} assets x {} bits",
                raw.n,
                meta.assets.len(),
                meta.discretization.bits_per_asset()
            )));
        }
        let matrix = QuboMatrix::from_triplets(raw.n, raw.offset, raw.entries).map_err(D::Error::custom)?;
        Ok(QuboModel {
            matrix,
            kind: meta.kind,
            discretization: meta.discretization,
            lambda0: meta.lambda0,
            lambda1: meta.lambda1,
            stats: meta.stats,
            mu_min: meta.mu_min,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::equality_penalty;

    fn stats(mu: &[f64], cov: Vec<Vec<f64>>) -> AssetStats<f64> {
        AssetStats::from_mu_cov(
            (0..mu.len()).map(|i| format!("A{i}")).collect(),
            mu.to_vec(),
            Matrix::try_from(cov).unwrap(),
            252,
        )
        .unwrap()
    }

    fn three() -> AssetStats<f64> {
        stats(
            &[0.12, 0.08, 0.2],
            vec![vec![0.04, 0.006, -0.01], vec![0.006, 0.09, 0.012], vec![-0.01, 0.012, 0.16]],
        )
    }

    #[test]
    fn single_asset_proxy() {
        let s = stats(&[0.1], vec![vec![0.04]]);
        let d = proxy_discretization(9).unwrap();
        let bits = vec![true; 9];
        let h1 = proxy_constraint(&s, &d).unwrap();
        let h0 = proxy_objective(&s, &d).unwrap();
        assert!(h1.evaluate(&bits).unwrap().abs() < 1e-12);
        assert!((h0.evaluate(&bits).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_asset_proposed_zero_bits() {
        let s = stats(&[0.1], vec![vec![0.04]]);
        let d = proposed_discretization(0.1, 0.1, 4).unwrap();
        let bits = vec![false; 4];
        assert_eq!(proposed_objective(&s, &d).unwrap().evaluate(&bits).unwrap(), 0.0);
        assert_eq!(proposed_constraint(&s, &d).unwrap().evaluate(&bits).unwrap(), 1.0);
    }

    #[test]
    fn builders_equal_explicit_composition() {
        let s = three();
        let d = proxy_discretization(3).unwrap();
        let m = build_proxy(&s, &d, 1.3, 7.0).unwrap();
        let composed = QuboMatrix::zeros(9)
            .add_scaled(1.3, &proxy_objective(&s, &d).unwrap())
            .unwrap()
            .add_scaled(7.0, &proxy_constraint(&s, &d).unwrap())
            .unwrap();
        let dp = proposed_discretization(0.08, 0.1, 3).unwrap();
        let p = build_proposed(&s, &dp, 0.7, 300.0).unwrap();
        let composed_p = proposed_objective(&s, &dp)
            .unwrap()
            .scaled(0.7)
            .add_scaled(300.0, &proposed_constraint(&s, &dp).unwrap())
            .unwrap();
        for code in 0..512u32 {
            let x: Vec<bool> = (0..9).map(|b| code >> b & 1 == 1).collect();
            let a = m.matrix.evaluate(&x).unwrap();
            let b = composed.evaluate(&x).unwrap();
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
            let a = p.matrix.evaluate(&x).unwrap();
            let b = composed_p.evaluate(&x).unwrap();
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn constraints_are_equality_penalties() {
        let s = three();
        let d = proposed_discretization(0.08, 0.1, 3).unwrap();
        let coeffs: Vec<f64> = s.mu.iter().flat_map(|&m| d.coeffs().iter().map(move |&c| m * c)).collect();
        let reference = equality_penalty(&coeffs, 1.0);
        let h1 = proposed_constraint(&s, &d).unwrap();
        let dx = proxy_discretization(3).unwrap();
        let proxy_ref = equality_penalty(&dx.coeffs().repeat(3), 1.0);
        let proxy_h1 = proxy_constraint(&s, &dx).unwrap();
        for code in 0..512u32 {
            let x: Vec<bool> = (0..9).map(|b| code >> b & 1 == 1).collect();
            assert!((h1.evaluate(&x).unwrap() - reference.evaluate(&x).unwrap()).abs() < 1e-10);
            assert!((proxy_h1.evaluate(&x).unwrap() - proxy_ref.evaluate(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn variable_counts() {
        let s = three();
        let m = build_proxy(&s, &proxy_discretization(9).unwrap(), 1.0, 1.0).unwrap();
        assert_eq!(m.n_variables(), 27);
        let d = proposed_discretization(0.08, 0.1, 7).unwrap();
        assert_eq!(build_proposed(&s, &d, 1.0, 1.0).unwrap().n_variables(), 21);
    }

    #[test]
    fn proposed_rejects_nonpositive_mu() {
        let s = stats(&[0.1, -0.01], vec![vec![0.04, 0.0], vec![0.0, 0.04]]);
        let d = proposed_discretization(0.1, 0.1, 3).unwrap();
        let err = build_proposed(&s, &d, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("assumption violated: nonpositive expected return"));
        assert!(err.to_string().contains("A1"));
    }

    #[test]
    fn lambda_validation() {
        let s = three();
        let d = proxy_discretization(2).unwrap();
        assert!(build_proxy(&s, &d, 0.0, 1.0).is_err());
        assert!(build_proxy(&s, &d, 1.0, -1.0).is_err());
        assert!(build_proxy(&s, &d, 1.0, 0.0).is_ok());
    }

    #[test]
    fn auto_bits_follow_mu_min() {
        let s = three();
        let spec = FormulationSpec::new(FormulationKind::Proposed);
        let d = spec.discretization(&s).unwrap();
        // 1/0.08 = 12.5; an eighth bit would push the partial sum to 12.7
        assert_eq!(d.bits_per_asset(), 7);
        assert!((d.max_value() - 12.5).abs() < 1e-12);
    }

    #[test]
    fn model_json_round_trip() {
        let s = three();
        let m = FormulationSpec::new(FormulationKind::Proposed).build(&s, 0.7, 300.0).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["kind", "lambda0", "lambda1", "assets", "discretization", "mu_min"] {
            assert!(v["metadata"].get(key).is_some(), "missing {key}");
        }
        let back: QuboModel<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
