//! The two QUBO encodings of the Max-Sharpe problem.
//!
//! *Proxy*: per-asset weights `w_i` are discretized directly; the objective
//! rewards return-per-risk `mu_i / sigma_i` and penalizes pairwise
//! correlation, with `(sum w - 1)^2` enforcing full investment.
//!
//! *Proposed*: the convex reformulation `min y^T Sigma y s.t. mu^T y = 1,
//! y >= 0`, with `y` discretized on `[0, 1/mu_min]` and weights recovered
//! as `w = y / sum(y)`.

mod builders;
mod discretization;
mod solution;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use builders::{
    build_proposed, build_proxy, discretized_quadratic, proposed_constraint, proposed_objective,
    proxy_constraint, proxy_objective, FormulationSpec, QuboModel,
};
pub use discretization::{
    max_proposed_bits, proposed_discretization, proxy_discretization, Discretization, PROPOSED_BITS,
    PROPOSED_STEP, PROXY_BITS,
};
pub use solution::{
    decode_proposed, decode_proxy, feasibility, proposed_tolerance, sharpe_ratio, PortfolioSolution,
    PROXY_TOLERANCE,
};

use crate::qubo::QuboError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulationKind {
    Proxy,
    Proposed,
}

impl fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormulationKind::Proxy => "proxy",
            FormulationKind::Proposed => "proposed",
        })
    }
}

impl FromStr for FormulationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proxy" => Ok(FormulationKind::Proxy),
            "proposed" => Ok(FormulationKind::Proposed),
            other => Err(format!("unknown formulation {other:?} (expected proxy|proposed)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormulationError {
    #[error("invalid discretization: {0}")]
    Discretization(String),
    #[error("discretization exceeds upper bound: partial sum {partial} >= 1/mu_min = {bound}")]
    BoundExceeded { partial: f64, bound: f64 },
    #[error("assumption violated: nonpositive expected return {mu}{}", asset.as_ref().map(|a| format!(" for {a}")).unwrap_or_default())]
    NonPositiveMu { asset: Option<String>, mu: f64 },
    #[error("asset {0} has zero volatility")]
    ZeroSigma(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid penalty weights lambda0={lambda0}, lambda1={lambda1}")]
    InvalidLambda { lambda0: f64, lambda1: f64 },
    #[error("bitstring has {found} bits, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("portfolio has no weight")]
    ZeroWeights,
    #[error("portfolio has zero variance")]
    ZeroVariance,
    #[error(transparent)]
    Qubo(#[from] QuboError),
}
