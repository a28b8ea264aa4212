use super::primitives::*;
use super::Ohlcv;

/// Marks 1 where `pred(close, band)` holds, 0 otherwise, NaN where the band
/// is undefined.
fn band_flag(close: &[f64], band: &[f64], pred: impl Fn(f64, f64) -> bool) -> Vec<f64> {
    zip_map(close, band, |c, b| {
        if b.is_nan() {
            f64::NAN
        } else if pred(c, b) {
            1.0
        } else {
            0.0
        }
    })
}

fn width(hi: &[f64], lo: &[f64], mid: &[f64]) -> Vec<f64> {
    (0..hi.len()).map(|i| (hi[i] - lo[i]) / mid[i] * 100.0).collect()
}

fn percent(close: &[f64], hi: &[f64], lo: &[f64]) -> Vec<f64> {
    let num = zip_map(close, lo, |c, l| c - l);
    let den = zip_map(hi, lo, |h, l| h - l);
    ratio(&num, &den)
}

/// Middle, upper, lower, width, percent, above-upper and below-lower.
pub fn bollinger(b: &Ohlcv, w: usize, dev: f64) -> [Vec<f64>; 7] {
    let mid = sma(&b.close, w);
    let sd = rolling_std(&b.close, w, 0);
    let hi = zip_map(&mid, &sd, |m, s| m + dev * s);
    let lo = zip_map(&mid, &sd, |m, s| m - dev * s);
    [
        mid.clone(),
        hi.clone(),
        lo.clone(),
        width(&hi, &lo, &mid),
        percent(&b.close, &hi, &lo),
        band_flag(&b.close, &hi, |c, h| c > h),
        band_flag(&b.close, &lo, |c, l| c < l),
    ]
}

/// Keltner channel built on the typical price.
pub fn keltner(b: &Ohlcv, w: usize) -> [Vec<f64>; 7] {
    let n = b.len();
    let tp: Vec<f64> = (0..n).map(|i| (b.high[i] + b.low[i] + b.close[i]) / 3.0).collect();
    let up: Vec<f64> = (0..n)
        .map(|i| (4.0 * b.high[i] - 2.0 * b.low[i] + b.close[i]) / 3.0)
        .collect();
    let down: Vec<f64> = (0..n)
        .map(|i| (-2.0 * b.high[i] + 4.0 * b.low[i] + b.close[i]) / 3.0)
        .collect();
    let mid = sma(&tp, w);
    let hi = sma(&up, w);
    let lo = sma(&down, w);
    [
        mid.clone(),
        hi.clone(),
        lo.clone(),
        width(&hi, &lo, &mid),
        percent(&b.close, &hi, &lo),
        band_flag(&b.close, &hi, |c, h| c > h),
        band_flag(&b.close, &lo, |c, l| c < l),
    ]
}

/// Lower, upper, middle, width, percent.
pub fn donchian(b: &Ohlcv, w: usize) -> [Vec<f64>; 5] {
    let hi = rolling_max(&b.high, w);
    let lo = rolling_min(&b.low, w);
    let mid = zip_map(&hi, &lo, |h, l| (h - l) / 2.0 + l);
    let close_mean = sma(&b.close, w);
    [
        lo.clone(),
        hi.clone(),
        mid,
        width(&hi, &lo, &close_mean),
        percent(&b.close, &hi, &lo),
    ]
}

/// Wilder ATR seeded with the mean of the first `w` true ranges.
pub fn average_true_range(b: &Ohlcv, w: usize) -> Vec<f64> {
    let tr = true_range(&b.high, &b.low, &b.close);
    let mut out = nan_vec(b.len());
    if w == 0 || b.len() < w {
        return out;
    }
    out[w - 1] = tr[..w].iter().sum::<f64>() / w as f64;
    for i in w..b.len() {
        out[i] = (out[i - 1] * (w - 1) as f64 + tr[i]) / w as f64;
    }
    out
}

pub fn ulcer_index(b: &Ohlcv, w: usize) -> Vec<f64> {
    let drawdown: Vec<f64> = (0..b.len())
        .map(|i| {
            // trailing-window peak, shorter at the start
            let start = (i + 1).saturating_sub(w);
            let peak = b.close[start..=i].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            100.0 * (b.close[i] - peak) / peak
        })
        .collect();
    rolling(&drawdown, w, |s| s.iter().map(|x| x * x / w as f64).sum::<f64>().sqrt())
}
