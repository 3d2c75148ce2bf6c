use std::path::PathBuf;

use sharpe_qubo::calibration::CalibrationError;
use sharpe_qubo::formulations::FormulationError;
use sharpe_qubo::market_data::DataError;
use sharpe_qubo::solvers::SolverError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
}
