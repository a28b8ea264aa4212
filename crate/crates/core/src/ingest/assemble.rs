use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::{lagged_technicals, technical_indicators};
use crate::ingest::matrix::{add_lags, weekday_dummies, ColumnKind, FeatureMatrix};
use crate::ingest::prices::{compute_returns, DailyTable, PriceSeries};

/// Which feature groups enter the matrix. Blockchain, macro and sentiment
/// groups are included when their inputs are supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureInventory {
    /// Open, high, low, close and adjusted close.
    pub price: bool,
    /// Lags applied to the price, blockchain, macro and lagged-technical groups.
    pub lags: Vec<usize>,
    pub lagged_technicals: bool,
    pub technicals: bool,
    pub weekdays: bool,
}

impl Default for FeatureInventory {
    fn default() -> Self {
        FeatureInventory {
            price: true,
            lags: vec![0, 1, 2],
            lagged_technicals: true,
            technicals: true,
            weekdays: true,
        }
    }
}

pub const PRICE_COLUMNS: [&str; 5] = ["open", "high", "low", "close", "adj_close"];

#[derive(Debug, Clone, Copy)]
pub struct AssemblyInputs<'a> {
    pub prices: &'a PriceSeries,
    /// The paired currency, needed for the lagged technicals.
    pub other: Option<&'a PriceSeries>,
    /// Must hold exactly the price calendar.
    pub blockchain: Option<&'a DailyTable>,
    /// Forward-filled onto the price calendar.
    pub macro_table: Option<&'a DailyTable>,
    /// Named columns, one value per price date.
    pub sentiment: Option<&'a [(String, Vec<f64>)]>,
}

struct Staged {
    name: String,
    kind: ColumnKind,
    values: Vec<f64>,
}

/// Builds the dense feature matrix. The target on date t is the return from
/// the close of t to the close of t+1, so the last price date is dropped.
/// Rows preceding the longest lag or indicator warm-up are dropped too.
pub fn assemble_matrix(inputs: &AssemblyInputs<'_>, inv: &FeatureInventory) -> Result<FeatureMatrix> {
    let prices = inputs.prices;
    let calendar = prices.dates();
    let returns = compute_returns(prices)?;
    let n = returns.values.len();

    let mut lagged: Vec<Staged> = Vec::new();
    let mut plain: Vec<Staged> = Vec::new();
    let cont = |name: &str, values: &[f64]| Staged {
        name: name.to_string(),
        kind: ColumnKind::Continuous,
        values: values[..n].to_vec(),
    };

    if inv.price {
        let cols = [
            prices.opens(),
            prices.highs(),
            prices.lows(),
            prices.closes(),
            prices.bars().iter().map(|b| b.adj_close).collect(),
        ];
        for (name, values) in PRICE_COLUMNS.iter().zip(&cols) {
            lagged.push(cont(name, values));
        }
    }
    if let Some(table) = inputs.blockchain {
        let cols = table.align(&calendar, false, "blockchain")?;
        for (name, values) in table.names.iter().zip(&cols) {
            lagged.push(cont(name, values));
        }
    }
    if let Some(table) = inputs.macro_table {
        let cols = table.align(&calendar, true, "macro")?;
        for (name, values) in table.names.iter().zip(&cols) {
            lagged.push(cont(name, values));
        }
    }
    if inv.lagged_technicals {
        let other = inputs
            .other
            .ok_or_else(|| Error::Argument("lagged technicals need the paired currency's prices".into()))?;
        for col in lagged_technicals(prices, other)?.columns {
            lagged.push(cont(&col.name, &col.values));
        }
    }
    if inv.technicals {
        for col in technical_indicators(prices)?.columns {
            let mut s = cont(&col.name, &col.values);
            if col.binary {
                s.kind = ColumnKind::Dummy;
            }
            plain.push(s);
        }
    }
    if let Some(cols) = inputs.sentiment {
        for (name, values) in cols {
            if values.len() != calendar.len() {
                return Err(Error::Alignment {
                    source_name: format!("sentiment column `{name}`"),
                    missing: vec![format!("{} of {} values", values.len(), calendar.len())],
                });
            }
            plain.push(cont(name, values));
        }
    }
    if inv.weekdays {
        for (name, values) in weekday_dummies(&calendar[..n]) {
            plain.push(Staged {
                name,
                kind: ColumnKind::Dummy,
                values,
            });
        }
    }
    if lagged.is_empty() && plain.is_empty() {
        return Err(Error::Argument("feature inventory selects no columns".into()));
    }

    // Lags are applied on a continuous staging matrix; warm-up NaN is allowed there.
    let mut staging = FeatureMatrix::new(calendar[..n].to_vec(), returns.values.clone())?;
    let lag_names: Vec<String> = lagged.iter().map(|s| s.name.clone()).collect();
    for s in lagged {
        staging.push_column(s.name, ColumnKind::Continuous, s.values)?;
    }
    let lags = if inv.lags.is_empty() { vec![0] } else { inv.lags.clone() };
    if lags.iter().any(|&k| k > 2) {
        return Err(Error::Argument(format!("lags must lie in 0..=2, got {lags:?}")));
    }
    let staging = add_lags(&staging, &lag_names, &lags)?;
    let offset = n - staging.n_rows();

    let mut all: Vec<Staged> = staging
        .columns()
        .iter()
        .enumerate()
        .map(|(i, meta)| Staged {
            name: meta.name.clone(),
            kind: meta.kind,
            values: staging.column_at(i).to_vec(),
        })
        .collect();
    for mut s in plain {
        s.values.drain(..offset);
        all.push(s);
    }

    let rows = staging.n_rows();
    let start = (0..rows)
        .find(|&i| all.iter().all(|s| !s.values[i].is_nan()))
        .ok_or_else(|| Error::InsufficientData(format!("no row has every feature defined among {rows} rows")))?;
    let mut out = FeatureMatrix::new(
        staging.dates()[start..].to_vec(),
        staging.target()[start..].to_vec(),
    )?;
    for s in all {
        out.push_column(s.name, s.kind, s.values[start..].to_vec())?;
    }
    out.ensure_dense()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::prices::PriceBar;
    use chrono::NaiveDate;

    fn series(n: usize, start: f64, wobble: f64) -> PriceSeries {
        let d0 = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        let bars = (0..n)
            .map(|i| {
                let c = start * (1.0 + wobble * ((i as f64) * 0.7).sin() + 0.001 * i as f64);
                let o = c * (1.0 + 0.004 * ((i as f64) * 1.3).cos());
                PriceBar {
                    date: d0 + chrono::Days::new(i as u64),
                    open: o,
                    high: c.max(o) * 1.01,
                    low: c.min(o) * 0.99,
                    close: c,
                    adj_close: c,
                    volume: 1000.0 + 100.0 * ((i as f64) * 0.3).sin(),
                }
            })
            .collect();
        PriceSeries::new(bars).unwrap()
    }

    #[test]
    fn price_only_no_lags_gives_five_columns() {
        let p = series(10, 100.0, 0.02);
        let inv = FeatureInventory {
            lags: vec![0],
            lagged_technicals: false,
            technicals: false,
            weekdays: false,
            ..Default::default()
        };
        let inputs = AssemblyInputs {
            prices: &p,
            other: None,
            blockchain: None,
            macro_table: None,
            sentiment: None,
        };
        let m = assemble_matrix(&inputs, &inv).unwrap();
        assert_eq!(m.n_cols(), 5);
        assert_eq!(m.n_rows(), 9);
        assert!((m.target()[0] - (p.closes()[1] / p.closes()[0] - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn blockchain_calendar_must_match() {
        let p = series(120, 100.0, 0.02);
        let o = series(120, 10.0, 0.03);
        let dates = p.dates()[1..].to_vec();
        let table = DailyTable {
            names: vec!["hash_rate".into()],
            columns: vec![vec![1.0; dates.len()]],
            dates,
        };
        let inputs = AssemblyInputs {
            prices: &p,
            other: Some(&o),
            blockchain: Some(&table),
            macro_table: None,
            sentiment: None,
        };
        match assemble_matrix(&inputs, &FeatureInventory::default()) {
            Err(Error::Alignment { missing, .. }) => assert_eq!(missing, vec!["2021-01-01".to_string()]),
            other => panic!("expected alignment error, got {other:?}"),
        }
    }

    #[test]
    fn warm_up_rows_dropped() {
        let p = series(120, 100.0, 0.02);
        let o = series(120, 10.0, 0.03);
        let inputs = AssemblyInputs {
            prices: &p,
            other: Some(&o),
            blockchain: None,
            macro_table: None,
            sentiment: None,
        };
        let m = assemble_matrix(&inputs, &FeatureInventory::default()).unwrap();
        let warm = technical_indicators(&p)
            .unwrap()
            .columns
            .iter()
            .map(|c| c.first_valid().unwrap())
            .max()
            .unwrap();
        assert!(warm > 2);
        assert_eq!(m.dates()[0], p.dates()[warm]);
        assert_eq!(m.n_rows(), 119 - warm);
        assert_eq!(m.n_cols(), 15 + 30 + 78 + 7);
    }
}
