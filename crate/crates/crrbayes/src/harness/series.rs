//! Price-series ingestion: header-keyed CSV of daily closes with optional
//! market option prices and risk-free rate quotes.

use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};

/// One trading day of input data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    /// ISO-8601 calendar day.
    pub date: NaiveDate,
    /// Closing price; strictly positive.
    pub close: f64,
    /// Observed market price of the option under study, if any.
    pub market_option_price: Option<f64>,
    /// Annualized risk-free quote for the day, if any.
    pub rate: Option<f64>,
}

/// A validated daily price series: strictly increasing dates, positive
/// closes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeriesFile {
    pub rows: Vec<SeriesRow>,
}

impl PriceSeriesFile {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Gross returns `close_t / close_{t-1}`; element `i` is the return
    /// realized on `rows[i + 1].date`.
    pub fn gross_returns(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| w[1].close / w[0].close)
            .collect()
    }

    /// Validates the cross-row invariants (row-level ones are checked at
    /// parse time).
    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.rows.windows(2).enumerate() {
            if w[1].date <= w[0].date {
                return Err(Error::invalid(
                    "dates",
                    format!(
                        "must be strictly increasing; row {} ({}) follows {}",
                        i + 2,
                        w[1].date,
                        w[0].date
                    ),
                ));
            }
        }
        Ok(())
    }
}

fn series_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Series {
        path: path.to_path_buf(),
        line: line as u64,
        reason: reason.into(),
    }
}

/// Loads and validates a CSV price series.
///
/// Parsing is header-keyed: the required columns `date` and `close` plus
/// the optional `market_option_price` and `rate` may appear in any order;
/// unrecognized columns are ignored. Errors carry the 1-based line number
/// of the offending row.
pub fn load_series<P: AsRef<Path>>(path: P) -> Result<PriceSeriesFile> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let date_col = column("date")
        .ok_or_else(|| series_err(path, 1, "missing required column `date`"))?;
    let close_col = column("close")
        .ok_or_else(|| series_err(path, 1, "missing required column `close`"))?;
    let market_col = column("market_option_price");
    let rate_col = column("rate");

    let mut rows: Vec<SeriesRow> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // after the header
        let record = record?;
        let raw = |col: usize, name: &str| -> Result<&str> {
            record
                .get(col)
                .ok_or_else(|| series_err(path, line, format!("missing `{name}` field")))
        };
        let date_text = raw(date_col, "date")?;
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d").map_err(|e| {
            series_err(path, line, format!("`date` is not an ISO-8601 day ({date_text}): {e}"))
        })?;
        let close: f64 = raw(close_col, "close")?.parse().map_err(|e| {
            series_err(path, line, format!("`close` is not a number: {e}"))
        })?;
        if !(close.is_finite() && close > 0.0) {
            return Err(series_err(
                path,
                line,
                format!("`close` must be positive and finite, got {close}"),
            ));
        }
        let optional = |col: Option<usize>, name: &str| -> Result<Option<f64>> {
            match col {
                None => Ok(None),
                Some(c) => {
                    let text = record.get(c).unwrap_or("");
                    if text.is_empty() {
                        Ok(None)
                    } else {
                        text.parse::<f64>().map(Some).map_err(|e| {
                            series_err(path, line, format!("`{name}` is not a number: {e}"))
                        })
                    }
                }
            }
        };
        let market_option_price = optional(market_col, "market_option_price")?;
        if let Some(m) = market_option_price {
            if !(m.is_finite() && m >= 0.0) {
                return Err(series_err(
                    path,
                    line,
                    format!("`market_option_price` must be nonnegative, got {m}"),
                ));
            }
        }
        let rate = optional(rate_col, "rate")?;
        if let Some(r) = rate {
            if !(r.is_finite() && r >= -1.0) {
                return Err(series_err(
                    path,
                    line,
                    format!("`rate` must be finite and at least -1, got {r}"),
                ));
            }
        }
        if let Some(prev) = rows.last() {
            if date <= prev.date {
                return Err(series_err(
                    path,
                    line,
                    format!(
                        "dates must be strictly increasing; {date} does not follow {}",
                        prev.date
                    ),
                ));
            }
        }
        rows.push(SeriesRow {
            date,
            close,
            market_option_price,
            rate,
        });
    }
    Ok(PriceSeriesFile { rows })
}
