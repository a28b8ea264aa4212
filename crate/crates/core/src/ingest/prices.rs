use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One daily OHLCV observation. Days start at 00:00 UTC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub adj_close: f64,
    pub volume: f64,
}

impl PriceBar {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let fields = [
            self.open,
            self.high,
            self.low,
            self.close,
            self.adj_close,
            self.volume,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err("non-finite value".into());
        }
        if self.low > self.high {
            return Err(format!("low {} exceeds high {}", self.low, self.high));
        }
        if self.low > self.open.min(self.close) {
            return Err(format!(
                "low {} exceeds min(open, close) {}",
                self.low,
                self.open.min(self.close)
            ));
        }
        if self.high < self.open.max(self.close) {
            return Err(format!(
                "high {} below max(open, close) {}",
                self.high,
                self.open.max(self.close)
            ));
        }
        if self.volume < 0.0 {
            return Err(format!("negative volume {}", self.volume));
        }
        Ok(())
    }

    pub fn typical_price(&self) -> f64 {
        (self.high + self.low + self.close) / 3.0
    }
}

/// Bars ordered by strictly increasing date.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PriceSeries {
    bars: Vec<PriceBar>,
}

impl PriceSeries {
    /// Sorts the bars and enforces the per-bar and ordering invariants.
    pub fn new(mut bars: Vec<PriceBar>) -> Result<Self> {
        for (i, bar) in bars.iter().enumerate() {
            bar.validate()
                .map_err(|e| Error::Validation(format!("bar {} ({}): {}", i + 1, bar.date, e)))?;
        }
        bars.sort_by_key(|b| b.date);
        if let Some(w) = bars.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(Error::Validation(format!("duplicate date {}", w[0].date)));
        }
        Ok(PriceSeries { bars })
    }

    pub fn bars(&self) -> &[PriceBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.bars.iter().map(|b| b.date).collect()
    }

    pub fn opens(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.open).collect()
    }

    pub fn highs(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.high).collect()
    }

    pub fn lows(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.low).collect()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.volume).collect()
    }

    /// Sub-series restricted to `dates`, which must all be present.
    pub fn select(&self, dates: &[NaiveDate], source_name: &str) -> Result<PriceSeries> {
        let index: BTreeMap<NaiveDate, &PriceBar> = self.bars.iter().map(|b| (b.date, b)).collect();
        let mut missing = Vec::new();
        let mut bars = Vec::with_capacity(dates.len());
        for d in dates {
            match index.get(d) {
                Some(b) => bars.push(**b),
                None => missing.push(d.to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Alignment {
                source_name: source_name.to_string(),
                missing,
            });
        }
        PriceSeries::new(bars)
    }

    /// Multiplies every price field by `factor`, leaving volume alone.
    pub fn scaled(&self, factor: f64) -> PriceSeries {
        let bars = self
            .bars
            .iter()
            .map(|b| PriceBar {
                open: b.open * factor,
                high: b.high * factor,
                low: b.low * factor,
                close: b.close * factor,
                adj_close: b.adj_close * factor,
                ..*b
            })
            .collect();
        PriceSeries { bars }
    }

    /// First `n` bars.
    pub fn prefix(&self, n: usize) -> PriceSeries {
        PriceSeries {
            bars: self.bars[..n.min(self.bars.len())].to_vec(),
        }
    }
}

/// Header names for each price field in a delimited input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriceSchema {
    pub date: String,
    pub open: String,
    pub high: String,
    pub low: String,
    pub close: String,
    pub adj_close: String,
    pub volume: String,
}

impl Default for PriceSchema {
    fn default() -> Self {
        PriceSchema {
            date: "date".into(),
            open: "open".into(),
            high: "high".into(),
            low: "low".into(),
            close: "close".into(),
            adj_close: "adj_close".into(),
            volume: "volume".into(),
        }
    }
}

/// Accepts `YYYY-MM-DD` or an RFC 3339 timestamp, normalized to the UTC day.
pub fn parse_day(s: &str) -> std::result::Result<NaiveDate, String> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d);
    }
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc).date_naive())
        .map_err(|_| format!("unparseable date `{s}`"))
}

fn column_index(
    headers: &csv::StringRecord,
    name: &str,
    path: &Path,
) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            line: 1,
            message: format!("missing column `{name}` in header"),
        })
}

fn parse_number(raw: &str, path: &Path, line: usize, column: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Format {
        path: path.to_path_buf(),
        line,
        message: format!("column `{column}`: cannot parse `{raw}` as a number"),
    })
}

pub fn load_price_series(path: &Path, schema: &PriceSchema) -> Result<PriceSeries> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let idx = [
        column_index(&headers, &schema.date, path)?,
        column_index(&headers, &schema.open, path)?,
        column_index(&headers, &schema.high, path)?,
        column_index(&headers, &schema.low, path)?,
        column_index(&headers, &schema.close, path)?,
        column_index(&headers, &schema.adj_close, path)?,
        column_index(&headers, &schema.volume, path)?,
    ];
    let names = [
        &schema.date,
        &schema.open,
        &schema.high,
        &schema.low,
        &schema.close,
        &schema.adj_close,
        &schema.volume,
    ];

    let mut bars = Vec::new();
    let mut seen: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(row + 2);
        let field = |k: usize| record.get(idx[k]).unwrap_or("");
        let date = parse_day(field(0)).map_err(|message| Error::Format {
            path: path.to_path_buf(),
            line,
            message,
        })?;
        let mut values = [0.0; 6];
        for (k, v) in values.iter_mut().enumerate() {
            *v = parse_number(field(k + 1), path, line, names[k + 1])?;
        }
        let bar = PriceBar {
            date,
            open: values[0],
            high: values[1],
            low: values[2],
            close: values[3],
            adj_close: values[4],
            volume: values[5],
        };
        bar.validate().map_err(|e| {
            Error::Validation(format!(
                "{}: row {} (line {line}, {date}): {e}",
                path.display(),
                row + 1
            ))
        })?;
        if let Some(first) = seen.insert(date, row + 1) {
            return Err(Error::Validation(format!(
                "{}: row {} repeats date {date} first seen on row {first}",
                path.display(),
                row + 1
            )));
        }
        bars.push(bar);
    }
    PriceSeries::new(bars)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Format {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

/// Daily simple returns r_t = (C_{t+1} - C_t) / C_t, keyed by the date of C_t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl ReturnSeries {
    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.dates
            .binary_search(&date)
            .ok()
            .map(|i| self.values[i])
    }
}

pub fn compute_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "returns need at least 2 bars, got {}",
            series.len()
        )));
    }
    let bars = series.bars();
    let values = bars
        .windows(2)
        .map(|w| (w[1].close - w[0].close) / w[0].close)
        .collect();
    let dates = bars[..bars.len() - 1].iter().map(|b| b.date).collect();
    Ok(ReturnSeries { dates, values })
}

/// A dated table of named numeric columns (blockchain and macro inputs).
#[derive(Debug, Clone, PartialEq)]
pub struct DailyTable {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    /// Column-major values.
    pub columns: Vec<Vec<f64>>,
}

impl DailyTable {
    /// Values for every calendar date. With `forward_fill`, a date missing from
    /// the table takes the most recent earlier observation.
    pub fn align(
        &self,
        calendar: &[NaiveDate],
        forward_fill: bool,
        source_name: &str,
    ) -> Result<Vec<Vec<f64>>> {
        let mut out = vec![Vec::with_capacity(calendar.len()); self.names.len()];
        let mut missing = Vec::new();
        for d in calendar {
            let pos = match self.dates.binary_search(d) {
                Ok(i) => Some(i),
                Err(0) => None,
                Err(i) if forward_fill => Some(i - 1),
                Err(_) => None,
            };
            match pos {
                Some(i) => {
                    for (c, col) in out.iter_mut().enumerate() {
                        col.push(self.columns[c][i]);
                    }
                }
                None => missing.push(d.to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Alignment {
                source_name: source_name.to_string(),
                missing,
            });
        }
        Ok(out)
    }
}

/// Loads `date` plus the listed columns. Dates must be unique.
pub fn load_daily_table(path: &Path, columns: &[String]) -> Result<DailyTable> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let date_idx = column_index(&headers, "date", path)?;
    let idx = columns
        .iter()
        .map(|c| column_index(&headers, c, path))
        .collect::<Result<Vec<_>>>()?;

    let mut rows: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(row + 2);
        let date = parse_day(record.get(date_idx).unwrap_or("")).map_err(|message| Error::Format {
            path: path.to_path_buf(),
            line,
            message,
        })?;
        let values = idx
            .iter()
            .zip(columns)
            .map(|(&i, name)| parse_number(record.get(i).unwrap_or(""), path, line, name))
            .collect::<Result<Vec<_>>>()?;
        if rows.insert(date, values).is_some() {
            return Err(Error::Validation(format!(
                "{}: row {} repeats date {date}",
                path.display(),
                row + 1
            )));
        }
    }
    let dates: Vec<NaiveDate> = rows.keys().copied().collect();
    let mut cols = vec![Vec::with_capacity(dates.len()); columns.len()];
    for values in rows.values() {
        for (c, v) in values.iter().enumerate() {
            cols[c].push(*v);
        }
    }
    Ok(DailyTable {
        dates,
        names: columns.to_vec(),
        columns: cols,
    })
}
