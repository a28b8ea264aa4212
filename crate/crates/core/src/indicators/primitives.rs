//! Window primitives over `f64` series. NaN marks an undefined value and
//! propagates through every rolling operation.

pub fn nan_vec(n: usize) -> Vec<f64> {
    vec![f64::NAN; n]
}

/// Exponentially weighted mean, recursive form `y = (1-a) y_prev + a x`,
/// seeded at the first defined value. A value is reported once `min_periods`
/// defined observations have been seen. Undefined inputs after the seed decay
/// the previous weight instead of resetting it.
pub fn ewm(x: &[f64], alpha: f64, min_periods: usize) -> Vec<f64> {
    let mut out = nan_vec(x.len());
    let old_factor = 1.0 - alpha;
    let mut weighted = f64::NAN;
    let mut old_wt = 1.0;
    let mut nobs = 0usize;
    for (i, &cur) in x.iter().enumerate() {
        let observed = !cur.is_nan();
        if observed {
            nobs += 1;
        }
        if weighted.is_nan() {
            if observed {
                weighted = cur;
            }
        } else {
            old_wt *= old_factor;
            if observed {
                if weighted != cur {
                    weighted = (old_wt * weighted + alpha * cur) / (old_wt + alpha);
                }
                old_wt = 1.0;
            }
        }
        if nobs >= min_periods.max(1) {
            out[i] = weighted;
        }
    }
    out
}

/// EMA with `alpha = 2 / (span + 1)`, reported after `span` observations.
pub fn ema(x: &[f64], span: usize) -> Vec<f64> {
    ewm(x, 2.0 / (span as f64 + 1.0), span)
}

/// Applies `f` to every full window that holds no NaN.
pub fn rolling(x: &[f64], w: usize, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut out = nan_vec(x.len());
    if w == 0 {
        return out;
    }
    for i in (w - 1)..x.len() {
        let win = &x[i + 1 - w..=i];
        if win.iter().all(|v| !v.is_nan()) {
            out[i] = f(win);
        }
    }
    out
}

pub fn rolling_sum(x: &[f64], w: usize) -> Vec<f64> {
    rolling(x, w, |s| s.iter().sum())
}

pub fn sma(x: &[f64], w: usize) -> Vec<f64> {
    rolling(x, w, |s| s.iter().sum::<f64>() / s.len() as f64)
}

pub fn rolling_max(x: &[f64], w: usize) -> Vec<f64> {
    rolling(x, w, |s| s.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

pub fn rolling_min(x: &[f64], w: usize) -> Vec<f64> {
    rolling(x, w, |s| s.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Rolling standard deviation with `ddof` degrees of freedom removed.
pub fn rolling_std(x: &[f64], w: usize, ddof: usize) -> Vec<f64> {
    rolling(x, w, |s| {
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let ss: f64 = s.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - ddof as f64)).sqrt()
    })
}

/// Linearly weighted moving average, newest value weighted `w`.
pub fn wma(x: &[f64], w: usize) -> Vec<f64> {
    let denom = (w * (w + 1)) as f64;
    rolling(x, w, |s| {
        s.iter()
            .enumerate()
            .map(|(k, v)| (k + 1) as f64 * 2.0 / denom * v)
            .sum()
    })
}

/// `x[t] - x[t-1]`, undefined at 0.
pub fn diff(x: &[f64]) -> Vec<f64> {
    shift_op(x, 1, |cur, prev| cur - prev)
}

/// `x[t-k]`, undefined for `t < k`.
pub fn shift(x: &[f64], k: usize) -> Vec<f64> {
    let mut out = nan_vec(x.len());
    for i in k..x.len() {
        out[i] = x[i - k];
    }
    out
}

/// `f(x[t], x[t-k])`, undefined for `t < k`.
pub fn shift_op(x: &[f64], k: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = nan_vec(x.len());
    for i in k..x.len() {
        out[i] = f(x[i], x[i - k]);
    }
    out
}

/// True range with the first bar using `high - low`.
pub fn true_range(high: &[f64], low: &[f64], close: &[f64]) -> Vec<f64> {
    (0..close.len())
        .map(|i| {
            let hl = high[i] - low[i];
            if i == 0 {
                hl
            } else {
                let pc = close[i - 1];
                hl.max((high[i] - pc).abs()).max((low[i] - pc).abs())
            }
        })
        .collect()
}

/// Cumulative sum that leaves NaN inputs as NaN outputs and skips them.
pub fn cumsum(x: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    x.iter()
        .map(|&v| {
            if v.is_nan() {
                f64::NAN
            } else {
                acc += v;
                acc
            }
        })
        .collect()
}

pub fn zip_map(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// Elementwise ratio where a zero denominator yields NaN.
pub fn ratio(num: &[f64], den: &[f64]) -> Vec<f64> {
    zip_map(num, den, |n, d| if d == 0.0 { f64::NAN } else { n / d })
}

/// First index whose value is defined.
pub fn first_valid(x: &[f64]) -> Option<usize> {
    x.iter().position(|v| !v.is_nan())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ewm_seeds_at_first_defined_value() {
        let x = [f64::NAN, 2.0, 4.0, 8.0];
        let y = ewm(&x, 0.5, 2);
        assert!(y[0].is_nan() && y[1].is_nan());
        assert_eq!(y[2], 3.0);
        assert_eq!(y[3], 5.5);
    }

    #[test]
    fn ewm_constant_stays_exact() {
        let x = vec![100.0; 50];
        assert!(ema(&x, 3).iter().skip(2).all(|&v| v == 100.0));
    }

    #[test]
    fn ewm_gap_decays_weight() {
        let x = [1.0, f64::NAN, 3.0];
        let y = ewm(&x, 0.5, 1);
        assert_eq!(y[1], 1.0);
        // old weight 0.25 after the gap
        assert!((y[2] - (0.25 * 1.0 + 0.5 * 3.0) / 0.75).abs() < 1e-15);
    }

    #[test]
    fn rolling_requires_full_window() {
        let x = [1.0, 2.0, 3.0, f64::NAN, 5.0, 6.0];
        let s = sma(&x, 2);
        assert!(s[0].is_nan());
        assert_eq!(s[1], 1.5);
        assert_eq!(s[2], 2.5);
        assert!(s[3].is_nan() && s[4].is_nan());
        assert_eq!(s[5], 5.5);
    }

    #[test]
    fn wma_weights() {
        let x = [1.0, 2.0, 3.0];
        let w = wma(&x, 3);
        assert!((w[2] - (1.0 + 4.0 + 9.0) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn std_ddof() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((rolling_std(&x, 4, 1)[3] - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((rolling_std(&x, 4, 0)[3] - 1.25f64.sqrt()).abs() < 1e-12);
    }
}
