use super::primitives::*;
use super::Ohlcv;

/// Wilder RSI. The first bar counts as a zero change, so the value is
/// defined from index `w - 1`.
pub fn rsi(close: &[f64], w: usize) -> Vec<f64> {
    let n = close.len();
    let mut up = vec![0.0; n];
    let mut down = vec![0.0; n];
    for i in 1..n {
        let d = close[i] - close[i - 1];
        if d > 0.0 {
            up[i] = d;
        } else if d < 0.0 {
            down[i] = -d;
        }
    }
    let alpha = 1.0 / w as f64;
    let eu = ewm(&up, alpha, w);
    let ed = ewm(&down, alpha, w);
    zip_map(&eu, &ed, |u, d| {
        if d == 0.0 {
            100.0
        } else {
            100.0 - 100.0 / (1.0 + u / d)
        }
    })
}

/// Stochastic RSI and its two smoothings, on a 0..1 scale.
pub fn stoch_rsi(close: &[f64], w: usize, smooth1: usize, smooth2: usize) -> [Vec<f64>; 3] {
    let r = rsi(close, w);
    let lo = rolling_min(&r, w);
    let hi = rolling_max(&r, w);
    let s: Vec<f64> = (0..r.len()).map(|i| (r[i] - lo[i]) / (hi[i] - lo[i])).collect();
    let k = sma(&s, smooth1);
    let d = sma(&k, smooth2);
    [s, k, d]
}

pub fn tsi(close: &[f64], slow: usize, fast: usize) -> Vec<f64> {
    let d = diff(close);
    let ad: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let num = ema(&ema(&d, slow), fast);
    let den = ema(&ema(&ad, slow), fast);
    zip_map(&num, &den, |a, b| a / b * 100.0)
}

pub fn ultimate_oscillator(b: &Ohlcv, windows: [usize; 3], weights: [f64; 3]) -> Vec<f64> {
    let n = b.len();
    let tr = true_range(&b.high, &b.low, &b.close);
    let mut bp = nan_vec(n);
    for i in 1..n {
        bp[i] = b.close[i] - b.low[i].min(b.close[i - 1]);
    }
    let avg: Vec<Vec<f64>> = windows
        .iter()
        .map(|&w| zip_map(&rolling_sum(&bp, w), &rolling_sum(&tr, w), |p, t| p / t))
        .collect();
    let total: f64 = weights.iter().sum();
    (0..n)
        .map(|i| {
            100.0 * (weights[0] * avg[0][i] + weights[1] * avg[1][i] + weights[2] * avg[2][i]) / total
        })
        .collect()
}

/// Stochastic %K and its moving average.
pub fn stochastic(b: &Ohlcv, w: usize, smooth: usize) -> [Vec<f64>; 2] {
    let lo = rolling_min(&b.low, w);
    let hi = rolling_max(&b.high, w);
    let k: Vec<f64> = (0..b.len())
        .map(|i| 100.0 * (b.close[i] - lo[i]) / (hi[i] - lo[i]))
        .collect();
    let d = sma(&k, smooth);
    [k, d]
}

pub fn williams_r(b: &Ohlcv, w: usize) -> Vec<f64> {
    let lo = rolling_min(&b.low, w);
    let hi = rolling_max(&b.high, w);
    (0..b.len())
        .map(|i| -100.0 * (hi[i] - b.close[i]) / (hi[i] - lo[i]))
        .collect()
}

pub fn awesome_oscillator(b: &Ohlcv, fast: usize, slow: usize) -> Vec<f64> {
    let median = zip_map(&b.high, &b.low, |h, l| 0.5 * (h + l));
    zip_map(&sma(&median, fast), &sma(&median, slow), |f, s| f - s)
}

/// Kaufman adaptive moving average, seeded with the close at `w - 1`.
pub fn kama(close: &[f64], w: usize, fast: usize, slow: usize) -> Vec<f64> {
    let n = close.len();
    let mut out = nan_vec(n);
    if w == 0 || n < w {
        return out;
    }
    let fast_sc = 2.0 / (fast as f64 + 1.0);
    let slow_sc = 2.0 / (slow as f64 + 1.0);
    out[w - 1] = close[w - 1];
    for i in w..n {
        let change = (close[i] - close[i - w]).abs();
        let noise: f64 = (i - w + 1..=i).map(|k| (close[k] - close[k - 1]).abs()).sum();
        let er = if noise != 0.0 { change / noise } else { 0.0 };
        let sc = (er * (fast_sc - slow_sc) + slow_sc).powi(2);
        out[i] = out[i - 1] + sc * (close[i] - out[i - 1]);
    }
    out
}

pub fn rate_of_change(close: &[f64], w: usize) -> Vec<f64> {
    shift_op(close, w, |c, p| (c - p) / p * 100.0)
}

/// Percentage oscillator on any series: line, signal, histogram.
pub fn percentage_oscillator(x: &[f64], fast: usize, slow: usize, signal: usize) -> [Vec<f64>; 3] {
    let line = zip_map(&ema(x, fast), &ema(x, slow), |f, s| (f - s) / s * 100.0);
    let sig = ema(&line, signal);
    let hist = zip_map(&line, &sig, |l, s| l - s);
    [line, sig, hist]
}
