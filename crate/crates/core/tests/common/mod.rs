//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// VIF of each column from an explicit regression on the others plus an
/// intercept, solved through the normal equations.
pub fn vif_oracle(cols: &[Vec<f64>]) -> Vec<f64> {
    let p = cols.len();
    let n = cols[0].len();
    (0..p)
        .map(|j| {
            let y = &cols[j];
            let mut design: Vec<Vec<f64>> = (0..n).map(|_| vec![1.0]).collect();
            for (k, c) in cols.iter().enumerate() {
                if k != j {
                    for i in 0..n {
                        design[i].push(c[i]);
                    }
                }
            }
            let m = p;
            let mut xtx = vec![vec![0.0; m]; m];
            let mut xty = vec![0.0; m];
            for i in 0..n {
                for a in 0..m {
                    xty[a] += design[i][a] * y[i];
                    for b in 0..m {
                        xtx[a][b] += design[i][a] * design[i][b];
                    }
                }
            }
            let beta = gauss_solve(xtx, xty).expect("oracle system is singular");
            let mean = y.iter().sum::<f64>() / n as f64;
            let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
            let sse: f64 = (0..n)
                .map(|i| {
                    let fit: f64 = design[i].iter().zip(&beta).map(|(d, b)| d * b).sum();
                    (y[i] - fit) * (y[i] - fit)
                })
                .sum();
            1.0 / (sse / sst)
        })
        .collect()
}

/// Random columns with planted partial collinearity: each column past the
/// first mixes earlier columns with fresh noise of random weight.
pub fn collinear_columns(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    for j in 0..p {
        let noise: f64 = rng.random_range(0.1..1.0);
        let weights: Vec<f64> = (0..j).map(|_| rng.random_range(-1.0..1.0)).collect();
        let col: Vec<f64> = (0..n)
            .map(|i| {
                let mix: f64 = weights.iter().enumerate().map(|(k, w)| w * cols[k][i]).sum();
                mix + noise * rng.random_range(-1.0..1.0)
            })
            .collect();
        cols.push(col);
    }
    cols
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Final wallet value of every 2ⁿ holding schedule, the best one returned.
/// `hold[t]` is whether coins are held after the decision at close t; the last
/// day never trades.
pub fn brute_force_ideal(closes: &[f64], cost: f64, initial: f64) -> f64 {
    let n = closes.len();
    let days = n.saturating_sub(1);
    let mut best = f64::MIN;
    for mask in 0u32..(1u32 << days) {
        let mut fiat = initial;
        let mut coins = 0.0;
        for t in 0..days {
            let want = mask >> t & 1 == 1;
            if want && coins == 0.0 && fiat > 0.0 {
                coins = fiat * (1.0 - cost) / closes[t];
                fiat = 0.0;
            } else if !want && coins > 0.0 {
                fiat = coins * closes[t] * (1.0 - cost);
                coins = 0.0;
            }
        }
        let v = fiat + coins * closes[n - 1];
        if v > best {
            best = v;
        }
    }
    best
}

/// A dense matrix of continuous columns `x0..`, one row per target value,
/// dated from 2020-01-01.
pub fn matrix_from(rows: &[Vec<f64>], target: &[f64]) -> sentitrade::ingest::FeatureMatrix {
    use sentitrade::ingest::{ColumnKind, FeatureMatrix};
    let start = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let dates = (0..target.len()).map(|i| start + chrono::Days::new(i as u64)).collect();
    let mut m = FeatureMatrix::new(dates, target.to_vec()).unwrap();
    let p = rows.first().map_or(0, Vec::len);
    for j in 0..p {
        m.push_column(format!("x{j}"), ColumnKind::Continuous, rows.iter().map(|r| r[j]).collect())
            .unwrap();
    }
    m
}

/// Rows with a noisy linear target.
pub fn linear_data(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let w: Vec<f64> = (0..p).map(|_| r.random_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let y = rows
        .iter()
        .map(|x| x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 0.3 * r.random_range(-1.0..1.0))
        .collect();
    (rows, y)
}
