use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{DataError, PricePanel};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKind {
    Simple,
    Log,
}

impl fmt::Display for ReturnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReturnKind::Simple => "simple",
            ReturnKind::Log => "log",
        })
    }
}

impl FromStr for ReturnKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(ReturnKind::Simple),
            "log" => Ok(ReturnKind::Log),
            other => Err(format!("unknown return kind {other:?} (expected simple|log)")),
        }
    }
}

/// Per-period returns; one row fewer than the price panel it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnPanel<T> {
    pub dates: Vec<NaiveDate>,
    pub assets: Vec<String>,
    pub returns: Vec<Vec<T>>,
    pub kind: ReturnKind,
}

impl<T: Scalar> ReturnPanel<T> {
    pub fn n_rows(&self) -> usize {
        self.returns.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn column(&self, asset: usize) -> Vec<T> {
        self.returns.iter().map(|r| r[asset]).collect()
    }
}

/// `R_t = (P_t - P_{t-1}) / P_{t-1}` for every asset.
pub fn simple_returns<T: Scalar>(panel: &PricePanel<T>) -> Result<ReturnPanel<T>, DataError> {
    let rows = dense_rows(panel)?;
    let returns = rows
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(&p0, &p1)| (p1 - p0) / p0).collect())
        .collect();
    Ok(ReturnPanel {
        dates: panel.dates()[1..].to_vec(),
        assets: panel.assets().to_vec(),
        returns,
        kind: ReturnKind::Simple,
    })
}

/// `log(1 + R_t)`, computed with `ln_1p` from the simple returns.
pub fn log_returns<T: Scalar>(panel: &PricePanel<T>) -> Result<ReturnPanel<T>, DataError> {
    let simple = simple_returns(panel)?;
    let mut returns = Vec::with_capacity(simple.n_rows());
    for (date, row) in simple.dates.iter().zip(&simple.returns) {
        let mut out = Vec::with_capacity(row.len());
        for (j, &r) in row.iter().enumerate() {
            if r <= -T::one() {
                return Err(DataError::LogReturnUndefined {
                    asset: simple.assets[j].clone(),
                    date: *date,
                    simple: r.as_f64(),
                });
            }
            out.push(r.ln_1p());
        }
        returns.push(out);
    }
    Ok(ReturnPanel { returns, kind: ReturnKind::Log, ..simple })
}

fn dense_rows<T: Scalar>(panel: &PricePanel<T>) -> Result<Vec<Vec<T>>, DataError> {
    let mut rows = Vec::with_capacity(panel.n_dates());
    for (date, row) in panel.dates().iter().zip(panel.rows()) {
        let mut out = Vec::with_capacity(row.len());
        for (j, cell) in row.iter().enumerate() {
            let p = cell.ok_or(DataError::NotDense)?;
            if !(p > T::zero()) || !p.is_finite() {
                return Err(DataError::InvalidPrice {
                    asset: panel.assets()[j].clone(),
                    date: *date,
                    price: p.as_f64(),
                });
            }
            out.push(p);
        }
        rows.push(out);
    }
    Ok(rows)
}
