use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::backtest::{GainDistribution, Side, TradeLedger};
use crate::error::{Error, Result};
use crate::models::{Direction, Task};

/// Two-tailed level below which a positive mean gain counts as significant.
pub const SIGNIFICANCE: f64 = 0.10;

/// Backtest outcome of one tuned model over all frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub currency: String,
    pub model: String,
    pub task: Task,
    pub feature_set: String,
    pub cv_accuracy: f64,
    pub test_accuracy: f64,
    pub cost_rate: f64,
    /// Final wallet value per frame.
    pub frame_values: Vec<f64>,
    pub transactions_mean: f64,
    pub cost_mean: f64,
    pub vs_random: GainDistribution,
    pub vs_hold: GainDistribution,
}

impl ModelResult {
    pub fn output_mean(&self) -> f64 {
        mean(&self.frame_values)
    }

    pub fn output_sd(&self) -> f64 {
        sample_sd(&self.frame_values)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub currency: String,
    pub task: Task,
    pub feature_set: String,
    pub models: usize,
    pub cv_accuracy: f64,
    pub test_accuracy: f64,
    pub output_mean: f64,
    /// Percentages of models in the group.
    pub outperform_random: f64,
    pub outperform_hold: f64,
    pub significant_random: f64,
    pub significant_hold: f64,
}

fn task_name(t: Task) -> &'static str {
    match t {
        Task::Regression => "regression",
        Task::Classification => "classification",
    }
}

/// Groups results by currency, task and feature set.
pub fn summarize(results: &[ModelResult]) -> Result<Vec<SummaryRow>> {
    if results.is_empty() {
        return Err(Error::InsufficientData("nothing to summarize".into()));
    }
    let mut groups: BTreeMap<(String, &str, String), Vec<&ModelResult>> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.currency.clone(), task_name(r.task), r.feature_set.clone()))
            .or_default()
            .push(r);
    }
    Ok(groups
        .into_values()
        .map(|g| {
            let n = g.len() as f64;
            let avg = |f: &dyn Fn(&ModelResult) -> f64| g.iter().map(|r| f(r)).sum::<f64>() / n;
            let pct = |f: &dyn Fn(&ModelResult) -> bool| 100.0 * g.iter().filter(|r| f(r)).count() as f64 / n;
            SummaryRow {
                currency: g[0].currency.clone(),
                task: g[0].task,
                feature_set: g[0].feature_set.clone(),
                models: g.len(),
                cv_accuracy: avg(&|r| r.cv_accuracy),
                test_accuracy: avg(&|r| r.test_accuracy),
                output_mean: avg(&|r| r.output_mean()),
                outperform_random: pct(&|r| r.vs_random.outperforms()),
                outperform_hold: pct(&|r| r.vs_hold.outperforms()),
                significant_random: pct(&|r| r.vs_random.significant(SIGNIFICANCE)),
                significant_hold: pct(&|r| r.vs_hold.significant(SIGNIFICANCE)),
            }
        })
        .collect())
}

/// Fixed six-decimal rendering; infinities print as `inf` / `-inf` and
/// values that round to zero print without a sign.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.6}");
    if s == "-0.000000" { "0.000000".into() } else { s }
}

/// Per-model table, best output first (ties by name).
pub fn models_table(results: &[ModelResult]) -> String {
    let mut rows: Vec<&ModelResult> = results.iter().collect();
    rows.sort_by(|a, b| {
        b.output_mean()
            .total_cmp(&a.output_mean())
            .then_with(|| a.model.cmp(&b.model))
            .then_with(|| a.feature_set.cmp(&b.feature_set))
    });
    let mut s = String::from(
        "currency\tmodel\ttask\tfeature_set\ttrain_cv_acc\ttest_acc\toutput_mean\toutput_sd\t\
         gain_random_mean\tgain_random_sd\tt_random\tp_random\t\
         gain_hold_mean\tgain_hold_sd\tt_hold\tp_hold\tcost_rate\ttransactions_mean\tcost_mean\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}",
            r.currency,
            r.model,
            task_name(r.task),
            r.feature_set,
            [
                r.cv_accuracy,
                r.test_accuracy,
                r.output_mean(),
                r.output_sd(),
                r.vs_random.mean,
                r.vs_random.sd,
                r.vs_random.t,
                r.vs_random.p,
                r.vs_hold.mean,
                r.vs_hold.sd,
                r.vs_hold.t,
                r.vs_hold.p,
                r.cost_rate,
                r.transactions_mean,
                r.cost_mean,
            ]
            .iter()
            .map(|v| num(*v))
            .collect::<Vec<_>>()
            .join("\t")
        );
    }
    s
}

pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut s = String::from(
        "currency\ttask\tfeature_set\tmodels\ttrain_cv_acc\ttest_acc\toutput_mean\t\
         outperform_random_pct\toutperform_hold_pct\tsignificant_random_pct\tsignificant_hold_pct\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}",
            r.currency,
            task_name(r.task),
            r.feature_set,
            r.models,
            [
                r.cv_accuracy,
                r.test_accuracy,
                r.output_mean,
                r.outperform_random,
                r.outperform_hold,
                r.significant_random,
                r.significant_hold,
            ]
            .iter()
            .map(|v| num(*v))
            .collect::<Vec<_>>()
            .join("\t")
        );
    }
    s
}

/// Mean and sample sd of per-frame final values for each benchmark.
pub fn baseline_table(currency: &str, scenarios: &[(&str, &[f64])]) -> String {
    let mut s = String::from("currency\tscenario\toutput_mean\toutput_sd\n");
    for (name, values) in scenarios {
        let _ = writeln!(s, "{currency}\t{name}\t{}\t{}", num(mean(values)), num(sample_sd(values)));
    }
    s
}

/// Price series with the model's call and the trade executed each day.
pub fn plot_data(dates: &[NaiveDate], closes: &[f64], directions: &[Direction], ledger: &TradeLedger) -> Result<String> {
    if dates.len() != closes.len() || directions.len() < closes.len().saturating_sub(1) {
        return Err(Error::Argument(format!(
            "{} dates, {} closes and {} directions",
            dates.len(),
            closes.len(),
            directions.len()
        )));
    }
    let mut action: BTreeMap<usize, Side> = BTreeMap::new();
    for e in &ledger.events {
        action.insert(e.day, e.side);
    }
    let mut s = String::from("date\tclose\tpredicted\taction\n");
    for (t, (d, c)) in dates.iter().zip(closes).enumerate() {
        let pred = match directions.get(t) {
            Some(Direction::Up) => "up",
            Some(Direction::Down) => "down",
            None => "",
        };
        let act = match action.get(&t) {
            Some(Side::Buy) => "buy",
            Some(Side::Sell) => "sell",
            None => "",
        };
        let _ = writeln!(s, "{d}\t{}\t{pred}\t{act}", num(*c));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backtest::gain_ratio_distribution;

    #[test]
    fn numbers_render_without_signed_zero() {
        assert_eq!(num(-1e-12), "0.000000");
        assert_eq!(num(-0.5), "-0.500000");
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }

    fn result(name: &str, model: &[f64], random: &[f64], hold: &[f64]) -> ModelResult {
        ModelResult {
            currency: "BTC".into(),
            model: name.into(),
            task: Task::Regression,
            feature_set: "all".into(),
            cv_accuracy: 0.5,
            test_accuracy: 0.5,
            cost_rate: 0.002,
            frame_values: model.to_vec(),
            transactions_mean: 0.0,
            cost_mean: 0.0,
            vs_random: gain_ratio_distribution(model, random).unwrap(),
            vs_hold: gain_ratio_distribution(model, hold).unwrap(),
        }
    }

    #[test]
    fn outperform_counting() {
        let base = [1000.0, 1000.0, 1000.0];
        let rows = summarize(&[
            result("a", &[1100.0, 1200.0, 1150.0], &base, &base),
            result("b", &[900.0, 950.0, 990.0], &base, &base),
        ])
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].outperform_random, rows[0].outperform_hold), (50.0, 50.0));
        assert_eq!(rows[0].significant_random, 50.0);
    }

    #[test]
    fn matching_baseline_never_significant() {
        let v = [1010.0, 990.0, 1000.0];
        let rows = summarize(&[result("a", &v, &v, &v)]).unwrap();
        assert_eq!((rows[0].outperform_random, rows[0].significant_hold), (0.0, 0.0));
    }

    #[test]
    fn beating_everywhere_is_full_marks() {
        let rows = summarize(&[result("a", &[1100.0, 1200.0], &[1000.0, 1000.0], &[1050.0, 1100.0])]).unwrap();
        assert_eq!((rows[0].outperform_random, rows[0].outperform_hold), (100.0, 100.0));
        assert!(summarize(&[]).is_err());
    }
}
