use super::primitives::*;
use super::Ohlcv;

/// MACD line, signal and histogram.
pub fn macd(close: &[f64], fast: usize, slow: usize, signal: usize) -> [Vec<f64>; 3] {
    let line = zip_map(&ema(close, fast), &ema(close, slow), |f, s| f - s);
    let sig = ema(&line, signal);
    let hist = zip_map(&line, &sig, |l, s| l - s);
    [line, sig, hist]
}

/// ADX with Wilder smoothing. DI lines are defined from index `w`, ADX from
/// `2w - 1`. Returns adx, +DI, -DI.
pub fn adx(b: &Ohlcv, w: usize) -> [Vec<f64>; 3] {
    let n = b.len();
    let mut out = [nan_vec(n), nan_vec(n), nan_vec(n)];
    if w == 0 || n <= w {
        return out;
    }
    let tr = true_range(&b.high, &b.low, &b.close);
    let mut pdm = vec![0.0; n];
    let mut ndm = vec![0.0; n];
    for i in 1..n {
        let up = b.high[i] - b.high[i - 1];
        let down = b.low[i - 1] - b.low[i];
        if up > down && up > 0.0 {
            pdm[i] = up;
        }
        if down > up && down > 0.0 {
            ndm[i] = down;
        }
    }
    let wf = w as f64;
    let mut s_tr: f64 = tr[1..=w].iter().sum();
    let mut s_p: f64 = pdm[1..=w].iter().sum();
    let mut s_n: f64 = ndm[1..=w].iter().sum();
    let mut dx = nan_vec(n);
    for i in w..n {
        if i > w {
            s_tr = s_tr - s_tr / wf + tr[i];
            s_p = s_p - s_p / wf + pdm[i];
            s_n = s_n - s_n / wf + ndm[i];
        }
        let dip = 100.0 * s_p / s_tr;
        let din = 100.0 * s_n / s_tr;
        out[1][i] = dip;
        out[2][i] = din;
        dx[i] = if dip + din == 0.0 {
            0.0
        } else {
            100.0 * (dip - din).abs() / (dip + din)
        };
    }
    let first = 2 * w - 1;
    if n > first {
        out[0][first] = dx[w..2 * w].iter().sum::<f64>() / wf;
        for i in (first + 1)..n {
            out[0][i] = (out[0][i - 1] * (wf - 1.0) + dx[i]) / wf;
        }
    }
    out
}

/// Positive, negative and difference of the vortex indicator.
pub fn vortex(b: &Ohlcv, w: usize) -> [Vec<f64>; 3] {
    let tr = true_range(&b.high, &b.low, &b.close);
    let n = b.len();
    let mut vmp = nan_vec(n);
    let mut vmm = nan_vec(n);
    for i in 1..n {
        vmp[i] = (b.high[i] - b.low[i - 1]).abs();
        vmm[i] = (b.low[i] - b.high[i - 1]).abs();
    }
    let trn = rolling_sum(&tr, w);
    let pos = zip_map(&rolling_sum(&vmp, w), &trn, |a, t| a / t);
    let neg = zip_map(&rolling_sum(&vmm, w), &trn, |a, t| a / t);
    let d = zip_map(&pos, &neg, |p, q| p - q);
    [pos, neg, d]
}

pub fn trix(close: &[f64], w: usize) -> Vec<f64> {
    let e3 = ema(&ema(&ema(close, w), w), w);
    shift_op(&e3, 1, |cur, prev| (cur - prev) / prev * 100.0)
}

pub fn mass_index(b: &Ohlcv, fast: usize, slow: usize) -> Vec<f64> {
    let amp = zip_map(&b.high, &b.low, |h, l| h - l);
    let e1 = ema(&amp, fast);
    let e2 = ema(&e1, fast);
    rolling_sum(&zip_map(&e1, &e2, |a, c| a / c), slow)
}

pub fn cci(b: &Ohlcv, w: usize, constant: f64) -> Vec<f64> {
    let tp: Vec<f64> = (0..b.len()).map(|i| (b.high[i] + b.low[i] + b.close[i]) / 3.0).collect();
    let mean = sma(&tp, w);
    let mad = rolling(&tp, w, |s| {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        s.iter().map(|v| (v - m).abs()).sum::<f64>() / s.len() as f64
    });
    (0..tp.len()).map(|i| (tp[i] - mean[i]) / (constant * mad[i])).collect()
}

/// Close displaced `w/2 + 1` bars back minus the `w`-bar mean.
pub fn dpo(close: &[f64], w: usize) -> Vec<f64> {
    let lagged = shift(close, w / 2 + 1);
    zip_map(&lagged, &sma(close, w), |c, m| c - m)
}

/// Know Sure Thing: weighted sum of smoothed rates of change, its signal and
/// their difference.
pub fn kst(close: &[f64], rocs: [usize; 4], windows: [usize; 4], signal: usize) -> [Vec<f64>; 3] {
    let n = close.len();
    let mut line = vec![0.0; n];
    for (k, (&r, &w)) in rocs.iter().zip(&windows).enumerate() {
        let roc = shift_op(close, r, |c, p| (c - p) / p);
        let smooth = sma(&roc, w);
        for i in 0..n {
            line[i] += (k + 1) as f64 * smooth[i];
        }
    }
    for v in &mut line {
        *v *= 100.0;
    }
    let sig = sma(&line, signal);
    let d = zip_map(&line, &sig, |l, s| l - s);
    [line, sig, d]
}

/// Conversion, base, span A and span B lines, without forward displacement.
pub fn ichimoku(b: &Ohlcv, conv: usize, base: usize, span_b: usize) -> [Vec<f64>; 4] {
    let mid = |w: usize| zip_map(&rolling_max(&b.high, w), &rolling_min(&b.low, w), |h, l| 0.5 * (h + l));
    let c = mid(conv);
    let k = mid(base);
    let a = zip_map(&c, &k, |x, y| 0.5 * (x + y));
    [c, k, a, mid(span_b)]
}

/// Parabolic SAR split into its up-trend and down-trend parts. The part not
/// active on a bar is reported as 0. The first two bars are undefined.
pub fn parabolic_sar(b: &Ohlcv, step: f64, max_step: f64) -> [Vec<f64>; 2] {
    let n = b.len();
    let mut up_out = nan_vec(n);
    let mut down_out = nan_vec(n);
    if n == 0 {
        return [up_out, down_out];
    }
    let mut up_trend = true;
    let mut af = step;
    let mut up_high = b.high[0];
    let mut down_low = b.low[0];
    let mut psar = b.close.clone();
    for i in 2..n {
        let mut reversal = false;
        let max_high = b.high[i];
        let min_low = b.low[i];
        if up_trend {
            psar[i] = psar[i - 1] + af * (up_high - psar[i - 1]);
            if min_low < psar[i] {
                reversal = true;
                psar[i] = up_high;
                down_low = min_low;
                af = step;
            } else {
                if max_high > up_high {
                    up_high = max_high;
                    af = (af + step).min(max_step);
                }
                if b.low[i - 2] < psar[i] {
                    psar[i] = b.low[i - 2];
                } else if b.low[i - 1] < psar[i] {
                    psar[i] = b.low[i - 1];
                }
            }
        } else {
            psar[i] = psar[i - 1] - af * (psar[i - 1] - down_low);
            if max_high > psar[i] {
                reversal = true;
                psar[i] = down_low;
                up_high = max_high;
                af = step;
            } else {
                if min_low < down_low {
                    down_low = min_low;
                    af = (af + step).min(max_step);
                }
                if b.high[i - 2] > psar[i] {
                    psar[i] = b.high[i - 2];
                } else if b.high[i - 1] > psar[i] {
                    psar[i] = b.high[i - 1];
                }
            }
        }
        up_trend = up_trend != reversal;
        if up_trend {
            up_out[i] = psar[i];
            down_out[i] = 0.0;
        } else {
            up_out[i] = 0.0;
            down_out[i] = psar[i];
        }
    }
    [up_out, down_out]
}

/// Schaff trend cycle: a doubly stochastic-smoothed MACD.
pub fn schaff_trend_cycle(
    close: &[f64],
    slow: usize,
    fast: usize,
    cycle: usize,
    smooth1: usize,
    smooth2: usize,
) -> Vec<f64> {
    let stoch = |x: &[f64]| {
        let lo = rolling_min(x, cycle);
        let hi = rolling_max(x, cycle);
        (0..x.len()).map(|i| 100.0 * (x[i] - lo[i]) / (hi[i] - lo[i])).collect::<Vec<f64>>()
    };
    let line = zip_map(&ema(close, fast), &ema(close, slow), |f, s| f - s);
    let d = ema(&stoch(&line), smooth1);
    ema(&stoch(&d), smooth2)
}
