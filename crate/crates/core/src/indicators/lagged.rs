use super::primitives::*;
use super::Ohlcv;

pub fn close_open_return(b: &Ohlcv) -> Vec<f64> {
    zip_map(&b.close, &b.open, |c, o| (c - o) / o)
}

pub fn log_return(b: &Ohlcv) -> Vec<f64> {
    shift_op(&b.close, 1, |c, p| (c / p).ln())
}

/// Return relative to the first close of the series.
pub fn cumulative_return(b: &Ohlcv) -> Vec<f64> {
    let Some(&c0) = b.close.first() else {
        return Vec::new();
    };
    b.close.iter().map(|c| c / c0 - 1.0).collect()
}

/// Rolling sample standard deviation of the close.
pub fn moving_std(b: &Ohlcv, w: usize) -> Vec<f64> {
    rolling_std(&b.close, w, 1)
}

pub fn parkinson(b: &Ohlcv) -> Vec<f64> {
    let k = 4.0 * std::f64::consts::LN_2;
    zip_map(&b.high, &b.low, |h, l| ((h / l).ln().powi(2) / k).sqrt())
}

pub fn intraday_range(b: &Ohlcv) -> Vec<f64> {
    (0..b.len()).map(|i| (b.high[i] - b.low[i]) / b.open[i]).collect()
}

pub fn simple_return(x: &[f64]) -> Vec<f64> {
    shift_op(x, 1, |c, p| c / p - 1.0)
}
