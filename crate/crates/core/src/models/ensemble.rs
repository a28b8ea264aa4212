use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::{fit_rows, score_rows, Direction, LinearModel, ModelSpec, Params, Task, TrainedModel};

const STACK_FOLDS: usize = 5;

fn fit_member(spec: &ModelSpec, rows: &[Vec<f64>], y: &[f64]) -> Result<TrainedModel> {
    let hyper = spec.candidates().into_iter().next().unwrap_or_default();
    let params = fit_rows(spec, rows, y, &hyper)?;
    Ok(TrainedModel {
        spec: spec.clone(),
        manifest: Vec::new(),
        hyper,
        params,
    })
}

/// Member output fed to the combiner: the raw prediction for regression, a
/// ±1 vote for classification.
fn member_outputs(member: &TrainedModel, rows: &[Vec<f64>], task: Task) -> Result<Vec<f64>> {
    let s = score_rows(member, rows)?;
    Ok(match task {
        Task::Regression => s,
        Task::Classification => s.into_iter().map(|v| Direction::of(v).sign()).collect(),
    })
}

pub(crate) fn fit_voting(spec: &ModelSpec, rows: &[Vec<f64>], y: &[f64]) -> Result<Params> {
    let members = spec
        .members
        .iter()
        .map(|m| fit_member(m, rows, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(Params::Voting { members })
}

/// Unweighted mean of member outputs. For classification the outputs are
/// ±1 votes, so an even split scores 0 and reads as down.
pub(crate) fn vote(members: &[TrainedModel], rows: &[Vec<f64>], task: Task) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; rows.len()];
    for m in members {
        for (a, v) in acc.iter_mut().zip(member_outputs(m, rows, task)?) {
            *a += v;
        }
    }
    let k = members.len() as f64;
    Ok(acc.into_iter().map(|a| a / k).collect())
}

/// Ordinary least squares with intercept; rank-deficient designs get the
/// minimum-norm solution.
pub fn ols(rows: &[Vec<f64>], y: &[f64]) -> Result<LinearModel> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n == 0 || n != y.len() {
        return Err(Error::Argument(format!("{n} rows and {} targets", y.len())));
    }
    let xm: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let ym = y.iter().sum::<f64>() / n as f64;
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j] - xm[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - ym));
    let svd = x.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let w = svd
        .solve(&yc, smax * 1e-10)
        .map_err(|e| Error::Numerical(format!("least squares failed: {e}")))?;
    let weights: Vec<f64> = w.iter().copied().collect();
    let bias = ym - weights.iter().zip(&xm).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearModel { weights, bias })
}

pub(crate) fn fit_stacking(spec: &ModelSpec, rows: &[Vec<f64>], y: &[f64]) -> Result<Params> {
    let n = rows.len();
    if n < 2 * STACK_FOLDS {
        return Err(Error::InsufficientData(format!(
            "stacking `{}` needs at least {} rows, got {n}",
            spec.name,
            2 * STACK_FOLDS
        )));
    }
    let task = spec.task;
    let target = match task {
        Task::Regression => y.to_vec(),
        Task::Classification => crate::models::class_target(y),
    };
    // out-of-fold member outputs over contiguous blocks
    let mut z = vec![vec![0.0; spec.members.len()]; n];
    for k in 0..STACK_FOLDS {
        let (lo, hi) = (k * n / STACK_FOLDS, (k + 1) * n / STACK_FOLDS);
        let train_rows: Vec<Vec<f64>> = rows[..lo].iter().chain(&rows[hi..]).cloned().collect();
        let train_y: Vec<f64> = y[..lo].iter().chain(&y[hi..]).copied().collect();
        for (j, mspec) in spec.members.iter().enumerate() {
            let m = fit_member(mspec, &train_rows, &train_y)?;
            for (i, v) in member_outputs(&m, &rows[lo..hi], task)?.into_iter().enumerate() {
                z[lo + i][j] = v;
            }
        }
    }
    let combiner = ols(&z, &target)?;
    let members = spec
        .members
        .iter()
        .map(|m| fit_member(m, rows, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(Params::Stacking { members, combiner })
}

pub(crate) fn stack(members: &[TrainedModel], combiner: &LinearModel, rows: &[Vec<f64>], task: Task) -> Result<Vec<f64>> {
    let outs = members
        .iter()
        .map(|m| member_outputs(m, rows, task))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..rows.len())
        .map(|i| {
            let z: Vec<f64> = outs.iter().map(|o| o[i]).collect();
            combiner.score(&z)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_plane_and_handles_duplicates() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 1.0 + 2.0 * r[0] - 0.5 * r[1]).collect();
        let m = ols(&rows, &y).unwrap();
        assert!((m.bias - 1.0).abs() < 1e-9 && (m.weights[0] - 2.0).abs() < 1e-9);

        let dup: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[0]]).collect();
        let m = ols(&dup, &rows.iter().map(|r| r[0]).collect::<Vec<_>>()).unwrap();
        assert!((m.weights[0] - 0.5).abs() < 1e-9 && (m.weights[1] - 0.5).abs() < 1e-9);
    }
}
