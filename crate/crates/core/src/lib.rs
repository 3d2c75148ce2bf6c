//! QUBO formulations of Sharpe-ratio maximizing portfolio selection.
//!
//! The pipeline turns daily prices into annualized statistics
//! ([`market_data`]), encodes the portfolio problem as a QUBO in one of two
//! ways ([`formulations`]), minimizes it with local heuristics or exact
//! enumeration ([`solvers`]) and tunes the penalty weights ([`calibration`]).
//! A classical long-only tangency solver serves as the reference.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod calibration;
pub mod formulations;
pub mod linalg;
pub mod market_data;
pub mod qubo;
pub mod scalar;
pub mod solvers;

pub use linalg::Matrix;
pub use scalar::Scalar;

pub type QuboMatrixF64 = qubo::QuboMatrix<f64>;
pub type IsingModelF64 = qubo::IsingModel<f64>;
pub type AssetStatsF64 = market_data::AssetStats<f64>;
pub type PricePanelF64 = market_data::PricePanel<f64>;
pub type QuboModelF64 = formulations::QuboModel<f64>;
pub type SolveResultF64 = solvers::SolveResult<f64>;
