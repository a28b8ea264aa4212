use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

fn check_shape(rows: &[Vec<f64>], y_len: usize) -> Result<usize> {
    if rows.len() != y_len {
        return Err(Error::Argument(format!("{} rows but {} targets", rows.len(), y_len)));
    }
    let p = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::Argument("ragged feature rows".into()));
    }
    Ok(p)
}

/// Minimizes ||y - Xw - b||² + λ||w||² in closed form. The intercept, when
/// enabled, is not penalized.
pub fn ridge_fit(rows: &[Vec<f64>], y: &[f64], lambda: f64, intercept: bool) -> Result<LinearModel> {
    let p = check_shape(rows, y.len())?;
    if !(lambda >= 0.0) {
        return Err(Error::Argument(format!("ridge penalty must be non-negative, got {lambda}")));
    }
    let n = rows.len();
    let (xm, ym) = if intercept {
        let xm: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
        (xm, y.iter().sum::<f64>() / n as f64)
    } else {
        (vec![0.0; p], 0.0)
    };
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j] - xm[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - ym));
    let mut a = x.transpose() * &x;
    for j in 0..p {
        a[(j, j)] += lambda;
    }
    let b = x.transpose() * yc;
    let scale = (0..p).map(|j| a[(j, j)]).fold(0.0, f64::max);
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Numerical(format!("ridge system is singular (lambda = {lambda})")))?;
    if lambda == 0.0 {
        let l = chol.l_dirty();
        if (0..p).any(|j| l[(j, j)] * l[(j, j)] <= 1e-12 * scale) {
            return Err(Error::Numerical("ridge system is singular (lambda = 0)".into()));
        }
    }
    let w = chol.solve(&b);
    let weights: Vec<f64> = w.iter().copied().collect();
    let bias = ym - weights.iter().zip(&xm).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearModel { weights, bias })
}

fn softplus(a: f64) -> f64 {
    a.max(0.0) + (-a.abs()).exp().ln_1p()
}

/// 1 / (1 + e^a)
fn sigmoid_neg(a: f64) -> f64 {
    if a >= 0.0 {
        let e = (-a).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + a.exp())
    }
}

pub struct LogisticFit {
    pub model: LinearModel,
    /// Objective value before the first step and after every accepted step.
    pub losses: Vec<f64>,
    pub converged: bool,
}

fn logistic_objective(rows: &[Vec<f64>], s: &[f64], lambda: f64, w: &[f64], b: f64) -> f64 {
    let n = rows.len() as f64;
    let data: f64 = rows
        .iter()
        .zip(s)
        .map(|(r, si)| {
            let z = b + w.iter().zip(r).map(|(a, x)| a * x).sum::<f64>();
            softplus(-si * z)
        })
        .sum::<f64>()
        / n;
    data + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
}

/// L2-penalized logistic regression by gradient descent with backtracking
/// line search, stopping once the largest gradient component falls below
/// `tol`. The intercept is not penalized.
pub fn logistic_fit(rows: &[Vec<f64>], labels: &[bool], lambda: f64, max_iter: usize, tol: f64) -> Result<LogisticFit> {
    let p = check_shape(rows, labels.len())?;
    if !(lambda >= 0.0) {
        return Err(Error::Argument(format!("logistic penalty must be non-negative, got {lambda}")));
    }
    let n = rows.len() as f64;
    let s: Vec<f64> = labels.iter().map(|l| if *l { 1.0 } else { -1.0 }).collect();
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut f = logistic_objective(rows, &s, lambda, &w, b);
    let mut losses = vec![f];
    let mut step: f64 = 1.0;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut gw: Vec<f64> = w.iter().map(|v| lambda * v).collect();
        let mut gb = 0.0;
        for (r, si) in rows.iter().zip(&s) {
            let z = b + w.iter().zip(r).map(|(a, x)| a * x).sum::<f64>();
            let c = -si * sigmoid_neg(si * z) / n;
            gb += c;
            for (g, x) in gw.iter_mut().zip(r) {
                *g += c * x;
            }
        }
        let gmax = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if gmax < tol {
            converged = true;
            break;
        }
        let gnorm2 = gb * gb + gw.iter().map(|g| g * g).sum::<f64>();
        step = (step * 2.0).min(1e6);
        let accepted = loop {
            let w_new: Vec<f64> = w.iter().zip(&gw).map(|(v, g)| v - step * g).collect();
            let b_new = b - step * gb;
            let f_new = logistic_objective(rows, &s, lambda, &w_new, b_new);
            if f_new <= f - 1e-4 * step * gnorm2 {
                break Some((w_new, b_new, f_new));
            }
            step *= 0.5;
            if step < 1e-16 {
                break None;
            }
        };
        match accepted {
            Some((w_new, b_new, f_new)) => {
                w = w_new;
                b = b_new;
                f = f_new;
                losses.push(f);
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    Ok(LogisticFit {
        model: LinearModel { weights: w, bias: b },
        losses,
        converged,
    })
}

/// Rosenblatt perceptron on ±1 targets. Rows are visited in a seeded random
/// order each epoch; training stops after an epoch without mistakes.
pub fn perceptron_fit(rows: &[Vec<f64>], y: &[f64], epochs: usize, eta: f64, seed: u64) -> Result<LinearModel> {
    let p = check_shape(rows, y.len())?;
    if !(eta > 0.0) {
        return Err(Error::Argument(format!("perceptron learning rate must be positive, got {eta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = LinearModel {
        weights: vec![0.0; p],
        bias: 0.0,
    };
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0;
        for &i in &order {
            let yi = if y[i] > 0.0 { 1.0 } else { -1.0 };
            if yi * m.score(&rows[i]) <= 0.0 {
                mistakes += 1;
                for (w, x) in m.weights.iter_mut().zip(&rows[i]) {
                    *w += eta * yi * x;
                }
                m.bias += eta * yi;
            }
        }
        if mistakes == 0 {
            break;
        }
    }
    Ok(m)
}
