use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::prices::{csv_error, parse_day};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Dummy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
}

/// A dated design matrix with one target value per row.
///
/// Values are stored column-major. NaN marks a missing value and is only
/// tolerated while a matrix is being assembled; [`FeatureMatrix::ensure_dense`]
/// rejects it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    dates: Vec<NaiveDate>,
    columns: Vec<ColumnMeta>,
    data: Vec<Vec<f64>>,
    target: Vec<f64>,
    train_end: Option<NaiveDate>,
    stats: Vec<ColumnStats>,
}

impl FeatureMatrix {
    pub fn new(dates: Vec<NaiveDate>, target: Vec<f64>) -> Result<Self> {
        if dates.len() != target.len() {
            return Err(Error::Argument(format!(
                "{} dates but {} target values",
                dates.len(),
                target.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("matrix dates must be strictly increasing".into()));
        }
        Ok(FeatureMatrix {
            dates,
            columns: Vec::new(),
            data: Vec::new(),
            target,
            train_end: None,
            stats: Vec::new(),
        })
    }

    pub fn push_column(&mut self, name: impl Into<String>, kind: ColumnKind, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.dates.len() {
            return Err(Error::Argument(format!(
                "column `{name}` has {} values for {} rows",
                values.len(),
                self.dates.len()
            )));
        }
        if self.column_index(&name).is_some() {
            return Err(Error::Argument(format!("duplicate column `{name}`")));
        }
        if kind == ColumnKind::Dummy && values.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::Validation(format!("dummy column `{name}` holds values outside {{0, 1}}")));
        }
        self.columns.push(ColumnMeta { name, kind });
        self.data.push(values);
        Ok(())
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn columns(&self) -> &[ColumnMeta] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.column_index(name).map(|i| self.data[i].as_slice())
    }

    pub fn column_at(&self, idx: usize) -> &[f64] {
        &self.data[idx]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn train_end(&self) -> Option<NaiveDate> {
        self.train_end
    }

    pub fn set_train_end(&mut self, date: NaiveDate) {
        self.train_end = Some(date);
    }

    pub fn stats(&self) -> &[ColumnStats] {
        &self.stats
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data.iter().map(|c| c[i]).collect()
    }

    /// Row-major copy of the values.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows()).map(|i| self.row(i)).collect()
    }

    pub fn ensure_dense(&self) -> Result<()> {
        for (meta, col) in self.columns.iter().zip(&self.data) {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "column `{}` has a missing value on {}",
                    meta.name, self.dates[i]
                )));
            }
        }
        if let Some(i) = self.target.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("target missing on {}", self.dates[i])));
        }
        Ok(())
    }

    /// Keeps rows `range` (half open).
    pub fn slice_rows(&self, start: usize, end: usize) -> FeatureMatrix {
        FeatureMatrix {
            dates: self.dates[start..end].to_vec(),
            columns: self.columns.clone(),
            data: self.data.iter().map(|c| c[start..end].to_vec()).collect(),
            target: self.target[start..end].to_vec(),
            train_end: self.train_end,
            stats: self.stats.clone(),
        }
    }

    /// Keeps only the named columns, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<FeatureMatrix> {
        let idx = names
            .iter()
            .map(|n| self.column_index(n).ok_or_else(|| Error::UnknownColumn(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        let keep: BTreeSet<&str> = names.iter().map(String::as_str).collect();
        Ok(FeatureMatrix {
            dates: self.dates.clone(),
            columns: idx.iter().map(|&i| self.columns[i].clone()).collect(),
            data: idx.iter().map(|&i| self.data[i].clone()).collect(),
            target: self.target.clone(),
            train_end: self.train_end,
            stats: self
                .stats
                .iter()
                .filter(|s| keep.contains(s.name.as_str()))
                .cloned()
                .collect(),
        })
    }

    pub fn drop_columns(&self, names: &[String]) -> Result<FeatureMatrix> {
        for n in names {
            if self.column_index(n).is_none() {
                return Err(Error::UnknownColumn(n.clone()));
            }
        }
        let keep: Vec<String> = self
            .columns
            .iter()
            .filter(|c| !names.contains(&c.name))
            .map(|c| c.name.clone())
            .collect();
        self.select_columns(&keep)
    }

    /// Continuous columns only.
    pub fn continuous(&self) -> FeatureMatrix {
        let names: Vec<String> = self
            .columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Continuous)
            .map(|c| c.name.clone())
            .collect();
        self.select_columns(&names).expect("names come from the matrix")
    }

    /// Number of rows dated on or before `date`.
    pub fn rows_through(&self, date: NaiveDate) -> usize {
        self.dates.partition_point(|d| *d <= date)
    }
}

/// Adds `c_lag_k` for every named column and every `k > 0` in `lags`, then
/// drops the leading rows that lack the longest lag.
pub fn add_lags(matrix: &FeatureMatrix, columns: &[String], lags: &[usize]) -> Result<FeatureMatrix> {
    for c in columns {
        if matrix.column_index(c).is_none() {
            return Err(Error::UnknownColumn(c.clone()));
        }
    }
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    if max_lag == 0 {
        return Ok(matrix.clone());
    }
    if max_lag >= matrix.n_rows() {
        return Err(Error::InsufficientData(format!(
            "lag {max_lag} needs more than {} rows",
            matrix.n_rows()
        )));
    }
    let mut out = matrix.clone();
    let mut positive: Vec<usize> = lags.iter().copied().filter(|&k| k > 0).collect();
    positive.sort_unstable();
    positive.dedup();
    for c in columns {
        let idx = matrix.column_index(c).expect("checked above");
        let kind = matrix.columns[idx].kind;
        let src = &matrix.data[idx];
        for &k in &positive {
            let mut lagged = vec![f64::NAN; src.len()];
            lagged[k..].copy_from_slice(&src[..src.len() - k]);
            out.push_column(format!("{c}_lag_{k}"), kind, lagged)?;
        }
    }
    Ok(out.slice_rows(max_lag, matrix.n_rows()))
}

pub const WEEKDAY_COLUMNS: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];

/// One-hot weekday columns named `mon`..`sun`.
pub fn weekday_dummies(dates: &[NaiveDate]) -> Vec<(String, Vec<f64>)> {
    let order = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];
    order
        .iter()
        .zip(WEEKDAY_COLUMNS)
        .map(|(wd, name)| {
            let values = dates
                .iter()
                .map(|d| if d.weekday() == *wd { 1.0 } else { 0.0 })
                .collect();
            (name.to_string(), values)
        })
        .collect()
}

/// Population mean and standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Z-scores every continuous column with the mean and population standard
/// deviation of the rows dated on or before `train_end`.
pub fn standardize(matrix: &FeatureMatrix, train_end: NaiveDate) -> Result<FeatureMatrix> {
    let n_train = matrix.rows_through(train_end);
    if n_train < 2 {
        return Err(Error::InsufficientData(format!(
            "standardization needs at least 2 training rows, got {n_train}"
        )));
    }
    if !matrix.columns.iter().any(|c| c.kind == ColumnKind::Continuous) {
        return Err(Error::Argument("no continuous columns to standardize".into()));
    }
    let mut stats = Vec::new();
    for (meta, col) in matrix.columns.iter().zip(&matrix.data) {
        if meta.kind != ColumnKind::Continuous {
            continue;
        }
        let (mean, sd) = mean_sd(&col[..n_train]);
        if !(sd > 0.0) {
            return Err(Error::ZeroVariance(meta.name.clone()));
        }
        stats.push(ColumnStats {
            name: meta.name.clone(),
            mean,
            sd,
        });
    }
    let mut out = apply_standardization(matrix, &stats)?;
    out.train_end = Some(train_end);
    Ok(out)
}

/// Applies previously computed statistics; columns without stats are copied.
pub fn apply_standardization(matrix: &FeatureMatrix, stats: &[ColumnStats]) -> Result<FeatureMatrix> {
    let mut out = matrix.clone();
    for s in stats {
        let idx = matrix
            .column_index(&s.name)
            .ok_or_else(|| Error::UnknownColumn(s.name.clone()))?;
        for v in out.data[idx].iter_mut() {
            *v = (*v - s.mean) / s.sd;
        }
    }
    out.stats = stats.to_vec();
    Ok(out)
}

/// Splits chronologically: rows dated on or before `boundary` train, the rest test.
pub fn split_train_test(matrix: &FeatureMatrix, boundary: NaiveDate) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let (Some(first), Some(last)) = (matrix.dates.first(), matrix.dates.last()) else {
        return Err(Error::Range("empty matrix".into()));
    };
    if boundary < *first || boundary >= *last {
        return Err(Error::Range(format!(
            "boundary {boundary} outside {first}..{last}"
        )));
    }
    let cut = matrix.rows_through(boundary);
    let mut train = matrix.slice_rows(0, cut);
    let mut test = matrix.slice_rows(cut, matrix.n_rows());
    train.train_end = Some(boundary);
    test.train_end = Some(boundary);
    Ok((train, test))
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixMeta {
    train_end: Option<NaiveDate>,
    rows: usize,
    columns: Vec<ColumnMeta>,
    #[serde(default)]
    standardization: Vec<ColumnStats>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".meta.toml");
    PathBuf::from(p)
}

/// Writes `path` (CSV: date, target, columns...) and `path.meta.toml`.
pub fn write_matrix(matrix: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut csv = String::new();
    csv.push_str("date,target");
    for c in &matrix.columns {
        csv.push(',');
        csv.push_str(&c.name);
    }
    csv.push('\n');
    for i in 0..matrix.n_rows() {
        write!(csv, "{},{}", matrix.dates[i], matrix.target[i]).unwrap();
        for col in &matrix.data {
            write!(csv, ",{}", col[i]).unwrap();
        }
        csv.push('\n');
    }
    std::fs::write(path, csv).map_err(|e| Error::io(path.display().to_string(), e))?;
    let meta = MatrixMeta {
        train_end: matrix.train_end,
        rows: matrix.n_rows(),
        columns: matrix.columns.clone(),
        standardization: matrix.stats.clone(),
    };
    let text = toml::to_string(&meta).map_err(|e| Error::Serialization(e.to_string()))?;
    let meta_path = sidecar_path(path);
    std::fs::write(&meta_path, text).map_err(|e| Error::io(meta_path.display().to_string(), e))
}

pub fn read_matrix(path: &Path) -> Result<FeatureMatrix> {
    let meta_path = sidecar_path(path);
    let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(meta_path.display().to_string(), e))?;
    let meta: MatrixMeta = toml::from_str(&text).map_err(|e| Error::Format {
        path: meta_path.clone(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let expected: Vec<&str> = ["date", "target"]
        .into_iter()
        .chain(meta.columns.iter().map(|c| c.name.as_str()))
        .collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Format {
            path: path.to_path_buf(),
            line: 1,
            message: "header does not match the metadata column list".into(),
        });
    }
    let mut dates = Vec::with_capacity(meta.rows);
    let mut target = Vec::with_capacity(meta.rows);
    let mut data = vec![Vec::with_capacity(meta.rows); meta.columns.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = row + 2;
        let bad = |message: String| Error::Format {
            path: path.to_path_buf(),
            line,
            message,
        };
        dates.push(parse_day(&record[0]).map_err(bad)?);
        let parse = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
        target.push(parse(&record[1])?);
        for (c, col) in data.iter_mut().enumerate() {
            col.push(parse(&record[c + 2])?);
        }
    }
    let mut m = FeatureMatrix::new(dates, target)?;
    for (meta_col, values) in meta.columns.into_iter().zip(data) {
        m.push_column(meta_col.name, meta_col.kind, values)?;
    }
    m.train_end = meta.train_end;
    m.stats = meta.standardization;
    Ok(m)
}
