//! Historical price ingestion: per-asset CSV parsing (Yahoo-Finance export
//! layout) and alignment of several assets onto their common trading dates.
//!
//! Alignment is a strict date intersection — days missing from any series are
//! dropped for all, and nothing is forward-filled, so no price is ever
//! fabricated.

use std::collections::HashMap;

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketDataError {
    #[error("missing required column {column:?} in header row")]
    MissingColumn { column: String },
    #[error("line {line}: {reason}")]
    BadRow { line: u64, reason: String },
    #[error("line {line}: date {date} appears more than once")]
    DuplicateDate { date: NaiveDate, line: u64 },
    #[error(
        "series {asset_id:?} has {rows} usable row(s); at least 2 are needed to form a return"
    )]
    TooFewRows { asset_id: String, rows: usize },
    #[error("row {index} is not in strictly increasing date order")]
    UnorderedRows { index: usize },
    #[error("row {index} has a non-positive price")]
    NonpositivePrice { index: usize },
    #[error("no price series given")]
    NoSeries,
    #[error("series share only {common} common date(s); at least 2 are needed")]
    EmptyIntersection { common: usize },
}

impl MarketDataError {
    pub fn name(&self) -> &'static str {
        match self {
            MarketDataError::MissingColumn { .. } => "MissingColumn",
            MarketDataError::BadRow { .. } => "BadRow",
            MarketDataError::DuplicateDate { .. } => "DuplicateDate",
            MarketDataError::TooFewRows { .. } => "TooFewRows",
            MarketDataError::UnorderedRows { .. } => "UnorderedRows",
            MarketDataError::NonpositivePrice { .. } => "NonpositivePrice",
            MarketDataError::NoSeries => "NoSeries",
            MarketDataError::EmptyIntersection { .. } => "EmptyIntersection",
        }
    }
}

/// One trading day of one asset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRow {
    pub date: NaiveDate,
    pub close: f64,
    pub adj_close: Option<f64>,
}

/// Price history of a single asset: strictly increasing dates, positive
/// prices, at least two rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    asset_id: String,
    rows: Vec<PriceRow>,
}

impl PriceSeries {
    pub fn new(asset_id: impl Into<String>, rows: Vec<PriceRow>) -> Result<Self, MarketDataError> {
        let asset_id = asset_id.into();
        if rows.len() < 2 {
            return Err(MarketDataError::TooFewRows {
                asset_id,
                rows: rows.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if !(row.close.is_finite() && row.close > 0.0) {
                return Err(MarketDataError::NonpositivePrice { index: i });
            }
            if let Some(adj) = row.adj_close {
                if !(adj.is_finite() && adj > 0.0) {
                    return Err(MarketDataError::NonpositivePrice { index: i });
                }
            }
            if i > 0 && rows[i - 1].date >= row.date {
                return Err(MarketDataError::UnorderedRows { index: i });
            }
        }
        Ok(PriceSeries { asset_id, rows })
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn rows(&self) -> &[PriceRow] {
        &self.rows
    }
}

/// Several assets on their common trading-date grid. Prices are stored
/// row-major: one row per date, one column per asset, column order following
/// the input order of the source series.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPrices {
    asset_ids: Vec<String>,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
    adj_closes: Vec<Option<f64>>,
}

impl AlignedPrices {
    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn close(&self, date_index: usize, asset_index: usize) -> f64 {
        self.closes[date_index * self.n_assets() + asset_index]
    }

    pub fn adj_close(&self, date_index: usize, asset_index: usize) -> Option<f64> {
        self.adj_closes[date_index * self.n_assets() + asset_index]
    }

    /// One asset's aligned history as a standalone series.
    pub fn column(&self, asset_index: usize) -> PriceSeries {
        let rows = (0..self.n_dates())
            .map(|t| PriceRow {
                date: self.dates[t],
                close: self.close(t, asset_index),
                adj_close: self.adj_close(t, asset_index),
            })
            .collect();
        PriceSeries::new(self.asset_ids[asset_index].clone(), rows)
            .expect("aligned columns uphold the series invariants")
    }
}

fn header_index(headers: &csv::StringRecord, wanted: &str) -> Option<usize> {
    headers.iter().position(|h| h.eq_ignore_ascii_case(wanted))
}

fn csv_error_line(err: &csv::Error) -> u64 {
    err.position().map(|p| p.line()).unwrap_or(0)
}

/// Parses one asset's price history from CSV bytes.
///
/// Recognizes the columns `Date`, `Close`, and optionally `Adj Close`
/// case-insensitively; any other columns (Open/High/Low/Volume, …) are
/// ignored. Rows may arrive in any order — the result is sorted ascending by
/// date. An empty or `null` adjusted close is treated as absent.
pub fn parse_price_csv(bytes: &[u8], asset_id: &str) -> Result<PriceSeries, MarketDataError> {
    // A UTF-8 byte-order mark would otherwise glue itself onto the first
    // header name and defeat column matching.
    let bytes = bytes.strip_prefix("\u{feff}".as_bytes()).unwrap_or(bytes);

    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let headers = reader
        .headers()
        .map_err(|e| MarketDataError::BadRow {
            line: csv_error_line(&e).max(1),
            reason: format!("unreadable header row: {e}"),
        })?
        .clone();
    let date_col =
        header_index(&headers, "Date").ok_or_else(|| MarketDataError::MissingColumn {
            column: "Date".to_string(),
        })?;
    let close_col =
        header_index(&headers, "Close").ok_or_else(|| MarketDataError::MissingColumn {
            column: "Close".to_string(),
        })?;
    let adj_col = header_index(&headers, "Adj Close");

    let mut rows = Vec::new();
    let mut first_line_of_date: HashMap<NaiveDate, u64> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| MarketDataError::BadRow {
            line: csv_error_line(&e),
            reason: format!("unreadable row: {e}"),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |reason: String| MarketDataError::BadRow { line, reason };

        let date_text = record
            .get(date_col)
            .ok_or_else(|| bad("missing Date field".to_string()))?;
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d").map_err(|_| {
            bad(format!(
                "unparseable date {date_text:?} (expected YYYY-MM-DD)"
            ))
        })?;
        if let Some(&first) = first_line_of_date.get(&date) {
            return Err(MarketDataError::DuplicateDate {
                date,
                line: line.max(first),
            });
        }
        first_line_of_date.insert(date, line);

        let close_text = record
            .get(close_col)
            .ok_or_else(|| bad("missing Close field".to_string()))?;
        let close: f64 = close_text
            .parse()
            .map_err(|_| bad(format!("non-numeric close price {close_text:?}")))?;
        if !(close.is_finite() && close > 0.0) {
            return Err(bad(format!("close price {close_text} is not positive")));
        }

        let adj_close = match adj_col.and_then(|c| record.get(c)) {
            None => None,
            Some(text) if text.is_empty() || text.eq_ignore_ascii_case("null") => None,
            Some(text) => {
                let adj: f64 = text
                    .parse()
                    .map_err(|_| bad(format!("non-numeric adjusted close {text:?}")))?;
                if !(adj.is_finite() && adj > 0.0) {
                    return Err(bad(format!("adjusted close {text} is not positive")));
                }
                Some(adj)
            }
        };

        rows.push(PriceRow {
            date,
            close,
            adj_close,
        });
    }

    rows.sort_by_key(|r| r.date);
    PriceSeries::new(asset_id, rows)
}

/// Aligns several series onto the dates present in *all* of them, ascending.
/// Column order follows the input order. Days missing anywhere are dropped
/// everywhere; nothing is interpolated.
pub fn align(series: &[PriceSeries]) -> Result<AlignedPrices, MarketDataError> {
    if series.is_empty() {
        return Err(MarketDataError::NoSeries);
    }

    let date_maps: Vec<HashMap<NaiveDate, usize>> = series
        .iter()
        .map(|s| {
            s.rows()
                .iter()
                .enumerate()
                .map(|(i, r)| (r.date, i))
                .collect()
        })
        .collect();

    // Dates of the first series are ascending, so the intersection walked in
    // that order is ascending too.
    let common: Vec<NaiveDate> = series[0]
        .rows()
        .iter()
        .map(|r| r.date)
        .filter(|d| date_maps[1..].iter().all(|m| m.contains_key(d)))
        .collect();
    if common.len() < 2 {
        return Err(MarketDataError::EmptyIntersection {
            common: common.len(),
        });
    }

    let n = series.len();
    let mut closes = Vec::with_capacity(common.len() * n);
    let mut adj_closes = Vec::with_capacity(common.len() * n);
    for date in &common {
        for (s, map) in series.iter().zip(&date_maps) {
            let row = s.rows()[map[date]];
            closes.push(row.close);
            adj_closes.push(row.adj_close);
        }
    }

    Ok(AlignedPrices {
        asset_ids: series.iter().map(|s| s.asset_id().to_string()).collect(),
        dates: common,
        closes,
        adj_closes,
    })
}
