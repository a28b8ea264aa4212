use super::primitives::*;
use super::Ohlcv;

/// Close location value, 0 when the bar has no range.
fn clv(b: &Ohlcv) -> Vec<f64> {
    (0..b.len())
        .map(|i| {
            let range = b.high[i] - b.low[i];
            if range == 0.0 {
                0.0
            } else {
                ((b.close[i] - b.low[i]) - (b.high[i] - b.close[i])) / range
            }
        })
        .collect()
}

fn typical(b: &Ohlcv) -> Vec<f64> {
    (0..b.len()).map(|i| (b.high[i] + b.low[i] + b.close[i]) / 3.0).collect()
}

pub fn money_flow_index(b: &Ohlcv, w: usize) -> Vec<f64> {
    let tp = typical(b);
    let flow: Vec<f64> = (0..b.len())
        .map(|i| {
            let sign = if i == 0 || tp[i] == tp[i - 1] {
                0.0
            } else if tp[i] > tp[i - 1] {
                1.0
            } else {
                -1.0
            };
            tp[i] * b.volume[i] * sign
        })
        .collect();
    rolling(&flow, w, |s| {
        let pos: f64 = s.iter().filter(|v| **v >= 0.0).sum();
        let neg: f64 = s.iter().filter(|v| **v < 0.0).sum::<f64>().abs();
        100.0 - 100.0 / (1.0 + pos / neg)
    })
}

pub fn accumulation_distribution(b: &Ohlcv) -> Vec<f64> {
    cumsum(&zip_map(&clv(b), &b.volume, |c, v| c * v))
}

pub fn on_balance_volume(b: &Ohlcv) -> Vec<f64> {
    let mut acc = 0.0;
    (0..b.len())
        .map(|i| {
            if i > 0 {
                let d = b.close[i] - b.close[i - 1];
                if d > 0.0 {
                    acc += b.volume[i];
                } else if d < 0.0 {
                    acc -= b.volume[i];
                }
            }
            acc
        })
        .collect()
}

pub fn chaikin_money_flow(b: &Ohlcv, w: usize) -> Vec<f64> {
    let mfv = zip_map(&clv(b), &b.volume, |c, v| c * v);
    ratio(&rolling_sum(&mfv, w), &rolling_sum(&b.volume, w))
}

pub fn force_index(b: &Ohlcv, w: usize) -> Vec<f64> {
    let raw = zip_map(&diff(&b.close), &b.volume, |d, v| d * v);
    ema(&raw, w)
}

/// Ease of movement and its moving average.
pub fn ease_of_movement(b: &Ohlcv, w: usize) -> (Vec<f64>, Vec<f64>) {
    let em: Vec<f64> = (0..b.len())
        .map(|i| {
            if i == 0 || b.volume[i] == 0.0 {
                return f64::NAN;
            }
            let moved = (b.high[i] - b.high[i - 1]) + (b.low[i] - b.low[i - 1]);
            moved * (b.high[i] - b.low[i]) / (2.0 * b.volume[i]) * 1e8
        })
        .collect();
    let smoothed = sma(&em, w);
    (em, smoothed)
}

pub fn volume_price_trend(b: &Ohlcv) -> Vec<f64> {
    let pct = shift_op(&b.close, 1, |c, p| c / p - 1.0);
    cumsum(&zip_map(&pct, &b.volume, |r, v| r * v))
}

pub fn negative_volume_index(b: &Ohlcv) -> Vec<f64> {
    let mut out = Vec::with_capacity(b.len());
    let mut nvi = 1000.0;
    for i in 0..b.len() {
        if i > 0 && b.volume[i - 1] > b.volume[i] {
            nvi *= 1.0 + (b.close[i] / b.close[i - 1] - 1.0);
        }
        out.push(nvi);
    }
    out
}

pub fn vwap(b: &Ohlcv, w: usize) -> Vec<f64> {
    let pv = zip_map(&typical(b), &b.volume, |p, v| p * v);
    ratio(&rolling_sum(&pv, w), &rolling_sum(&b.volume, w))
}
