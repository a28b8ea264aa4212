use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backtest::report::{num, summarize, SummaryRow};
use crate::error::{Error, Result};
use crate::pipeline::{read_json, BacktestResults, Stage, MANIFEST_FILE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub currency: String,
    pub task: String,
    pub metric: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

impl ComparisonRow {
    pub fn delta(&self) -> Option<f64> {
        Some(self.b? - self.a?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub feature_sets: (String, String),
    /// Matrix width of each run.
    pub columns: (usize, usize),
    pub frames: usize,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "field\trun_a\trun_b\tdelta");
        let _ = writeln!(s, "feature_set\t{}\t{}\t", self.feature_sets.0, self.feature_sets.1);
        let (ca, cb) = self.columns;
        let _ = writeln!(s, "columns\t{ca}\t{cb}\t{}", cb as i64 - ca as i64);
        let _ = writeln!(s, "frames\t{}\t{}\t0", self.frames, self.frames);
        let _ = writeln!(s);
        let _ = writeln!(s, "currency\ttask\tmetric\trun_a\trun_b\tdelta");
        let show = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), num);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.currency,
                r.task,
                r.metric,
                show(r.a),
                show(r.b),
                show(r.delta())
            );
        }
        s
    }
}

/// A run directory, or a manifest file inside one.
fn run_dir(p: &Path) -> PathBuf {
    if p.is_file() && p.file_name().is_some_and(|n| n == MANIFEST_FILE) {
        p.parent().and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default()
    } else {
        p.to_path_buf()
    }
}

fn load(p: &Path) -> Result<BacktestResults> {
    let dir = run_dir(p);
    if !dir.join(Stage::Backtest.name()).join(MANIFEST_FILE).is_file() {
        return Err(Error::Dependency {
            stage: "compare".into(),
            requires: Stage::Backtest.name().into(),
        });
    }
    read_json(&dir.join("backtest/results.json"))
}

const METRICS: [&str; 8] = [
    "models",
    "train_cv_acc",
    "test_acc",
    "output_mean",
    "outperform_random_pct",
    "outperform_hold_pct",
    "significant_random_pct",
    "significant_hold_pct",
];

fn metric_values(r: &SummaryRow) -> [f64; 8] {
    [
        r.models as f64,
        r.cv_accuracy,
        r.test_accuracy,
        r.output_mean,
        r.outperform_random,
        r.outperform_hold,
        r.significant_random,
        r.significant_hold,
    ]
}

fn groups(res: &BacktestResults) -> Result<BTreeMap<(String, String), [f64; 8]>> {
    Ok(summarize(&res.models)?
        .iter()
        .map(|r| {
            let task = serde_json::to_value(r.task)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            ((r.currency.clone(), task), metric_values(r))
        })
        .collect())
}

/// Summary rows of two finished runs side by side, matched on currency and
/// task. Both runs must have backtested over the same frames.
pub fn compare(run_a: &Path, run_b: &Path) -> Result<Comparison> {
    let a = load(run_a)?;
    let b = load(run_b)?;
    if a.frames != b.frames {
        return Err(Error::Comparison(format!(
            "run A has {} frame(s) of {} day(s), run B has {} frame(s) of {} day(s)",
            a.frames.len(),
            a.frames.first().map_or(0, |f| f.len),
            b.frames.len(),
            b.frames.first().map_or(0, |f| f.len),
        )));
    }
    let ga = groups(&a)?;
    let gb = groups(&b)?;
    let mut keys: Vec<&(String, String)> = ga.keys().chain(gb.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut rows = Vec::new();
    for key in keys {
        for (m, metric) in METRICS.iter().enumerate() {
            rows.push(ComparisonRow {
                currency: key.0.clone(),
                task: key.1.clone(),
                metric: metric.to_string(),
                a: ga.get(key).map(|v| v[m]),
                b: gb.get(key).map(|v| v[m]),
            });
        }
    }
    Ok(Comparison {
        feature_sets: (a.feature_set, b.feature_set),
        columns: (a.columns, b.columns),
        frames: a.frames.len(),
        rows,
    })
}
