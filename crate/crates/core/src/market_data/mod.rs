//! Market data preparation: price ingestion, cleaning, returns, annualized
//! statistics and the normality score used to pick a return kind.

mod normality;
mod panel;
mod returns;
mod stats;
mod synth;

pub use normality::{jarque_bera, normality_score, qq_points, NormalityScore};
pub use panel::{clean_panel, load_prices, read_prices, write_prices, PricePanel};
pub use returns::{log_returns, simple_returns, ReturnKind, ReturnPanel};
pub use stats::{annualized_stats, filter_positive_mu, AssetStats, DEFAULT_FREQUENCY};
pub use synth::{synthetic_panel, SynthConfig};

use chrono::NaiveDate;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty file")]
    EmptyFile,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("invalid date {value:?} on line {line}")]
    BadDate { line: u64, value: String },
    #[error("non-monotonic dates: {date} on line {line} does not follow the previous row")]
    NonMonotonicDates { line: u64, date: NaiveDate },
    #[error("asset {0} has fewer than two observations")]
    InsufficientObservations(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty panel after cleaning")]
    EmptyAfterCleaning,
    #[error("panel has missing entries")]
    NotDense,
    #[error("invalid price {price} for {asset} on {date}")]
    InvalidPrice { asset: String, date: NaiveDate, price: f64 },
    #[error("log-return undefined for {asset} on {date} (simple return {simple})")]
    LogReturnUndefined { asset: String, date: NaiveDate, simple: f64 },
    #[error("too few return rows: need at least {need}, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("degenerate asset {0}: zero variance")]
    DegenerateAsset(String),
    #[error("no investable assets: every expected return is nonpositive")]
    NoInvestableAssets,
}
