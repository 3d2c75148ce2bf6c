use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::DataError;
use crate::scalar::Scalar;

/// Dated matrix of adjusted close prices, one column per asset.
///
/// Rows are dates in strictly increasing order; `None` marks a missing price.
#[derive(Clone, Debug, PartialEq)]
pub struct PricePanel<T> {
    dates: Vec<NaiveDate>,
    assets: Vec<String>,
    prices: Vec<Vec<Option<T>>>,
}

impl<T: Scalar> PricePanel<T> {
    pub fn new(
        dates: Vec<NaiveDate>,
        assets: Vec<String>,
        prices: Vec<Vec<Option<T>>>,
    ) -> Result<Self, DataError> {
        if prices.len() != dates.len() {
            return Err(DataError::Dimension(format!(
                "{} price rows for {} dates",
                prices.len(),
                dates.len()
            )));
        }
        if let Some((i, row)) = prices.iter().enumerate().find(|(_, r)| r.len() != assets.len()) {
            return Err(DataError::Dimension(format!(
                "row {i} has {} cells for {} assets",
                row.len(),
                assets.len()
            )));
        }
        if let Some(w) = dates.windows(2).position(|w| w[1] <= w[0]) {
            return Err(DataError::NonMonotonicDates { line: w as u64 + 3, date: dates[w + 1] });
        }
        for (j, name) in assets.iter().enumerate() {
            if prices.iter().filter(|r| r[j].is_some()).count() < 2 {
                return Err(DataError::InsufficientObservations(name.clone()));
            }
        }
        Ok(Self { dates, assets, prices })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    /// Rows of the price matrix, one per date.
    pub fn rows(&self) -> &[Vec<Option<T>>] {
        &self.prices
    }

    pub fn get(&self, row: usize, asset: usize) -> Option<T> {
        self.prices[row][asset]
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn missing_count(&self) -> usize {
        self.prices.iter().flatten().filter(|c| c.is_none()).count()
    }

    pub fn is_dense(&self) -> bool {
        self.missing_count() == 0
    }

    pub fn column(&self, asset: usize) -> Vec<Option<T>> {
        self.prices.iter().map(|r| r[asset]).collect()
    }
}

/// Reads a price table from a CSV file: a `date` column followed by one
/// column per ticker.
pub fn load_prices<T: Scalar>(path: impl AsRef<Path>) -> Result<PricePanel<T>, DataError> {
    read_prices(File::open(path)?)
}

pub fn read_prices<T: Scalar, R: Read>(source: R) -> Result<PricePanel<T>, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = reader.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].trim().is_empty()) {
        return Err(DataError::EmptyFile);
    }
    if !header[0].trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case("date") {
        return Err(DataError::MalformedHeader(format!(
            "first column must be `date`, found {:?}",
            &header[0]
        )));
    }
    let assets: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    if assets.is_empty() {
        return Err(DataError::MalformedHeader("no asset columns".into()));
    }
    if let Some(blank) = assets.iter().position(String::is_empty) {
        return Err(DataError::MalformedHeader(format!("column {} has an empty ticker", blank + 2)));
    }
    for (i, a) in assets.iter().enumerate() {
        if assets[..i].contains(a) {
            return Err(DataError::MalformedHeader(format!("duplicate ticker {a}")));
        }
    }

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut prices = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let raw = record.get(0).unwrap_or("").trim();
        let date = NaiveDate::parse_from_str(raw, "%Y-%m-%d")
            .map_err(|_| DataError::BadDate { line, value: raw.to_string() })?;
        if dates.last().is_some_and(|&prev| date <= prev) {
            return Err(DataError::NonMonotonicDates { line, date });
        }
        dates.push(date);
        let row = record
            .iter()
            .skip(1)
            .map(|cell| {
                cell.trim().parse::<f64>().ok().filter(|v| v.is_finite()).map(T::lit)
            })
            .collect();
        prices.push(row);
    }
    if dates.is_empty() {
        return Err(DataError::EmptyFile);
    }
    PricePanel::new(dates, assets, prices)
}

pub fn write_prices<T: Scalar, W: Write>(panel: &PricePanel<T>, sink: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["date".to_string()];
    header.extend(panel.assets.iter().cloned());
    w.write_record(&header)?;
    for (date, row) in panel.dates.iter().zip(&panel.prices) {
        let mut rec = vec![date.format("%Y-%m-%d").to_string()];
        rec.extend(row.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Drops assets with a run of more than `max_consecutive_missing` missing
/// prices, trims leading rows until every surviving asset has been observed,
/// then forward-fills the remaining gaps.
pub fn clean_panel<T: Scalar>(
    panel: &PricePanel<T>,
    max_consecutive_missing: usize,
) -> Result<PricePanel<T>, DataError> {
    if max_consecutive_missing < 1 {
        return Err(DataError::InvalidArgument("max_consecutive_missing must be at least 1".into()));
    }
    let keep: Vec<usize> = (0..panel.n_assets())
        .filter(|&j| longest_missing_run(panel.prices.iter().map(|r| r[j])) <= max_consecutive_missing)
        .collect();
    if keep.is_empty() {
        return Err(DataError::EmptyAfterCleaning);
    }

    let start = keep
        .iter()
        .map(|&j| panel.prices.iter().position(|r| r[j].is_some()).unwrap_or(panel.n_dates()))
        .max()
        .unwrap_or(0);
    if panel.n_dates().saturating_sub(start) < 2 {
        return Err(DataError::EmptyAfterCleaning);
    }

    let mut last: Vec<Option<T>> = vec![None; keep.len()];
    let mut prices = Vec::with_capacity(panel.n_dates() - start);
    for (t, row) in panel.prices.iter().enumerate() {
        for (&j, prev) in keep.iter().zip(last.iter_mut()) {
            if row[j].is_some() {
                *prev = row[j];
            }
        }
        if t >= start {
            prices.push(last.clone());
        }
    }

    Ok(PricePanel {
        dates: panel.dates[start..].to_vec(),
        assets: keep.iter().map(|&j| panel.assets[j].clone()).collect(),
        prices,
    })
}

fn longest_missing_run<T>(cells: impl Iterator<Item = Option<T>>) -> usize {
    let mut longest = 0;
    let mut run = 0;
    for c in cells {
        if c.is_none() {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    longest
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(csv: &str) -> Result<PricePanel<f64>, DataError> {
        read_prices(csv.as_bytes())
    }

    #[test]
    fn fill_carries_values_from_trimmed_rows() {
        let p = parse("date,A,B\n2020-01-01,1,\n2020-01-02,,5\n2020-01-03,3,6\n").unwrap();
        let c = clean_panel(&p, 1).unwrap();
        assert_eq!(c.n_dates(), 2);
        assert_eq!(c.rows()[0], vec![Some(1.0), Some(5.0)]);
        assert!(c.is_dense());
    }

    #[test]
    fn dense_csv_parses() {
        let p = parse("date,AAA,BBB\n2020-01-01,1,2\n2020-01-02,1.5,2.5\n2020-01-03,2,3\n").unwrap();
        assert_eq!((p.n_dates(), p.n_assets()), (3, 2));
        assert!(p.is_dense());
        assert_eq!(p.get(1, 1), Some(2.5));
    }

    #[test]
    fn empty_cell_is_missing() {
        let p = parse("date,AAA,BBB\n2020-01-01,1,2\n2020-01-02,,2.5\n2020-01-03,2,3\n").unwrap();
        assert_eq!(p.missing_count(), 1);
        assert_eq!(p.get(1, 0), None);
    }

    #[test]
    fn unparseable_cell_is_missing() {
        let p = parse("date,AAA\n2020-01-01,1\n2020-01-02,n/a\n2020-01-03,2\n").unwrap();
        assert_eq!(p.get(1, 0), None);
    }

    #[test]
    fn out_of_order_dates_rejected() {
        let err = parse("date,AAA\n2020-01-02,1\n2020-01-01,2\n").unwrap_err();
        assert!(matches!(err, DataError::NonMonotonicDates { .. }), "{err}");
        let err = parse("date,AAA\n2020-01-02,1\n2020-01-02,2\n").unwrap_err();
        assert!(matches!(err, DataError::NonMonotonicDates { .. }));
    }

    #[test]
    fn header_and_empty_errors_are_distinct() {
        assert!(matches!(parse(""), Err(DataError::EmptyFile)));
        assert!(matches!(parse("date,AAA\n"), Err(DataError::EmptyFile)));
        assert!(matches!(parse("day,AAA\n2020-01-01,1\n"), Err(DataError::MalformedHeader(_))));
        assert!(matches!(parse("date\n2020-01-01\n"), Err(DataError::MalformedHeader(_))));
        assert!(matches!(parse("date,A,A\n2020-01-01,1,1\n"), Err(DataError::MalformedHeader(_))));
        assert!(matches!(parse("date,A\n01/01/2020,1\n"), Err(DataError::BadDate { .. })));
    }

    fn panel(cols: &[&[Option<f64>]]) -> PricePanel<f64> {
        let n = cols[0].len();
        let dates = (0..n)
            .map(|d| NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Days::new(d as u64))
            .collect();
        let assets = (0..cols.len()).map(|j| format!("A{j}")).collect();
        let prices = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        PricePanel::new(dates, assets, prices).unwrap()
    }

    #[test]
    fn long_gap_drops_asset() {
        let p = panel(&[
            &[Some(1.0), None, None, None, Some(2.0)],
            &[Some(1.0), Some(1.1), Some(1.2), Some(1.3), Some(1.4)],
        ]);
        let c = clean_panel(&p, 2).unwrap();
        assert_eq!(c.assets(), ["A1"]);
        assert_eq!(c.n_dates(), 5);
    }

    #[test]
    fn isolated_gap_is_forward_filled() {
        let p = panel(&[&[Some(1.0), Some(3.0), None, Some(2.0)]]);
        let c = clean_panel(&p, 2).unwrap();
        assert_eq!(c.column(0), vec![Some(1.0), Some(3.0), Some(3.0), Some(2.0)]);
    }

    #[test]
    fn dense_panel_unchanged() {
        let p = panel(&[&[Some(1.0), Some(2.0)], &[Some(3.0), Some(4.0)]]);
        assert_eq!(clean_panel(&p, 1).unwrap(), p);
    }

    #[test]
    fn leading_gap_trims_rows() {
        let p = panel(&[&[None, Some(2.0), Some(2.5)], &[Some(3.0), Some(4.0), Some(5.0)]]);
        let c = clean_panel(&p, 1).unwrap();
        assert_eq!(c.n_dates(), 2);
        assert!(c.is_dense());
        assert_eq!(c.dates()[0], p.dates()[1]);
    }

    #[test]
    fn everything_dropped_is_an_error() {
        let p = panel(&[&[Some(1.0), None, None, Some(2.0)]]);
        assert!(matches!(clean_panel(&p, 1), Err(DataError::EmptyAfterCleaning)));
        assert!(matches!(clean_panel(&p, 0), Err(DataError::InvalidArgument(_))));
    }

    #[test]
    fn csv_write_then_read() {
        let p = panel(&[&[Some(1.25), None, Some(2.0)], &[Some(3.0), Some(4.0), Some(5.5)]]);
        let mut buf = Vec::new();
        write_prices(&p, &mut buf).unwrap();
        assert_eq!(read_prices::<f64, _>(buf.as_slice()).unwrap(), p);
    }
}
