use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Per-frame relative gains of a model over a baseline with a one-sample
/// two-tailed t-test against zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainDistribution {
    pub gains: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single frame.
    pub sd: f64,
    pub t: f64,
    pub p: f64,
}

impl GainDistribution {
    pub fn n(&self) -> usize {
        self.gains.len()
    }

    pub fn outperforms(&self) -> bool {
        self.mean > 0.0
    }

    /// Better than the baseline at the given two-tailed level.
    pub fn significant(&self, alpha: f64) -> bool {
        self.mean > 0.0 && self.p < alpha
    }
}

/// One-sample t statistic and two-tailed p against a zero mean, with n - 1
/// degrees of freedom. Zero spread gives t = 0, p = 1 for a zero mean and
/// t = ±∞, p = 0 otherwise; a single observation gives t = 0, p = 1.
pub fn t_test(values: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InsufficientData("t-test over no values".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok((mean, 0.0, 0.0, 1.0));
    }
    let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt();
    if sd == 0.0 {
        return Ok(if mean == 0.0 {
            (mean, sd, 0.0, 1.0)
        } else {
            (mean, sd, mean.signum() * f64::INFINITY, 0.0)
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok((mean, sd, t, p))
}

/// g_f = (V_model,f - V_base,f) / V_base,f for every frame f.
pub fn gain_ratio_distribution(model: &[f64], baseline: &[f64]) -> Result<GainDistribution> {
    if model.len() != baseline.len() || model.is_empty() {
        return Err(Error::Argument(format!(
            "{} model frames against {} baseline frames",
            model.len(),
            baseline.len()
        )));
    }
    let gains = model
        .iter()
        .zip(baseline)
        .enumerate()
        .map(|(f, (m, b))| {
            if *b <= 0.0 {
                Err(Error::Division(format!("baseline value {b} in frame {f}")))
            } else {
                Ok((m - b) / b)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, sd, t, p) = t_test(&gains)?;
    Ok(GainDistribution { gains, mean, sd, t, p })
}
