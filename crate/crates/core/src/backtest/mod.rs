//! Test frames, the all-in trading strategy, benchmark scenarios, gain
//! statistics and report tables.

pub mod report;
pub mod stats;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Direction;

pub use report::{summarize, ModelResult, SummaryRow};
pub use stats::{gain_ratio_distribution, t_test, GainDistribution};

pub const INITIAL_WALLET: f64 = 1000.0;
pub const DEFAULT_COST: f64 = 0.002;

/// A window of `len` consecutive test days starting at row `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub start: usize,
    pub len: usize,
    pub start_date: Option<NaiveDate>,
}

impl Frame {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Frames starting at 0, shift, 2·shift, … that fit inside `test_len` days.
pub fn make_frames(test_len: usize, frame_len: usize, shift: usize) -> Result<Vec<Frame>> {
    if frame_len == 0 || shift == 0 {
        return Err(Error::Argument(format!(
            "frame length and shift must be positive (got {frame_len} and {shift})"
        )));
    }
    if frame_len > test_len {
        return Err(Error::Range(format!(
            "frames of {frame_len} days do not fit in a {test_len}-day test period"
        )));
    }
    let count = (test_len - frame_len) / shift + 1;
    Ok((0..count)
        .map(|k| Frame {
            start: k * shift,
            len: frame_len,
            start_date: None,
        })
        .collect())
}

/// Attaches the date of each frame's first row.
pub fn date_frames(frames: &mut [Frame], dates: &[NaiveDate]) -> Result<()> {
    for f in frames.iter_mut() {
        if f.start + f.len > dates.len() {
            return Err(Error::Range(format!(
                "frame {}..{} runs past {} dates",
                f.start,
                f.start + f.len,
                dates.len()
            )));
        }
        f.start_date = Some(dates[f.start]);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeEvent {
    /// Index into the price list.
    pub day: usize,
    pub side: Side,
    pub price: f64,
    /// Fiat spent on a buy, fiat value of the coins sold on a sell.
    pub notional: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeLedger {
    pub initial: f64,
    pub cost_rate: f64,
    pub events: Vec<TradeEvent>,
    /// Fiat plus coins marked at the last close.
    pub final_value: f64,
    pub final_fiat: f64,
    pub final_coins: f64,
}

impl TradeLedger {
    pub fn transactions(&self) -> usize {
        self.events.len()
    }

    pub fn total_cost(&self) -> f64 {
        self.events.iter().map(|e| e.cost).sum()
    }
}

fn check_prices(closes: &[f64]) -> Result<()> {
    if closes.is_empty() {
        return Err(Error::InsufficientData("no prices to trade on".into()));
    }
    if let Some((i, p)) = closes.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p > 0.0)) {
        return Err(Error::Validation(format!("price {p} on day {i} is not positive")));
    }
    Ok(())
}

fn check_rate(cost_rate: f64, initial: f64) -> Result<()> {
    if !(0.0..1.0).contains(&cost_rate) {
        return Err(Error::Argument(format!("cost rate {cost_rate} outside [0, 1)")));
    }
    if !(initial.is_finite() && initial > 0.0) {
        return Err(Error::Argument(format!("initial wallet {initial} must be positive")));
    }
    Ok(())
}

/// Replays the all-in strategy: on each day but the last, a fiat wallet buys
/// at the close when the day is predicted up and a coin wallet sells when it
/// is not. `directions` needs one entry per trading day; an entry for the
/// final day is accepted and ignored.
pub fn simulate_strategy(closes: &[f64], directions: &[Direction], cost_rate: f64, initial: f64) -> Result<TradeLedger> {
    check_prices(closes)?;
    check_rate(cost_rate, initial)?;
    let days = closes.len() - 1;
    if directions.len() != days && directions.len() != closes.len() {
        return Err(Error::Argument(format!(
            "{} directions for {} closes",
            directions.len(),
            closes.len()
        )));
    }
    let mut fiat = initial;
    let mut coins = 0.0;
    let mut holding = false;
    let mut events = Vec::new();
    for t in 0..days {
        let price = closes[t];
        match (holding, directions[t]) {
            (false, Direction::Up) => {
                events.push(TradeEvent {
                    day: t,
                    side: Side::Buy,
                    price,
                    notional: fiat,
                    cost: cost_rate * fiat,
                });
                coins = fiat * (1.0 - cost_rate) / price;
                fiat = 0.0;
                holding = true;
            }
            (true, Direction::Down) => {
                let notional = coins * price;
                events.push(TradeEvent {
                    day: t,
                    side: Side::Sell,
                    price,
                    notional,
                    cost: cost_rate * notional,
                });
                fiat = coins * price * (1.0 - cost_rate);
                coins = 0.0;
                holding = false;
            }
            _ => {}
        }
    }
    Ok(TradeLedger {
        initial,
        cost_rate,
        events,
        final_value: fiat + coins * closes[days],
        final_fiat: fiat,
        final_coins: coins,
    })
}

/// Best achievable wallet under costs, by dynamic programming over the best
/// fiat and coin balances reachable at each close. Ties prefer not trading.
pub fn ideal_scenario(closes: &[f64], cost_rate: f64, initial: f64) -> Result<TradeLedger> {
    check_prices(closes)?;
    check_rate(cost_rate, initial)?;
    let days = closes.len() - 1;
    // back[t][h]: whether the best state holding coins (h) or fiat after
    // day t was reached from a state holding coins on day t - 1
    let mut fiat = initial;
    let mut coins = f64::NEG_INFINITY;
    let mut back: Vec<[bool; 2]> = Vec::with_capacity(days);
    for &price in &closes[..days] {
        let sold = if coins.is_finite() { coins * price * (1.0 - cost_rate) } else { f64::NEG_INFINITY };
        let bought = fiat * (1.0 - cost_rate) / price;
        let (new_fiat, fiat_from_coins) = if sold > fiat { (sold, true) } else { (fiat, false) };
        let (new_coins, coins_from_coins) = if bought > coins { (bought, false) } else { (coins, true) };
        back.push([fiat_from_coins, coins_from_coins]);
        fiat = new_fiat;
        coins = new_coins;
    }
    let last = closes[days];
    let mut hold = coins.is_finite() && coins * last > fiat;
    let mut schedule = vec![Direction::Down; days];
    for t in (0..days).rev() {
        schedule[t] = if hold { Direction::Up } else { Direction::Down };
        hold = back[t][hold as usize];
    }
    simulate_strategy(closes, &schedule, cost_rate, initial)
}

/// Buys at the first close and holds to the last.
pub fn hold_scenario(closes: &[f64], cost_rate: f64, initial: f64) -> Result<TradeLedger> {
    if closes.len() < 2 {
        return Err(Error::InsufficientData(format!("holding needs 2 closes, got {}", closes.len())));
    }
    simulate_strategy(closes, &vec![Direction::Up; closes.len() - 1], cost_rate, initial)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomScenario {
    pub seed: u64,
    pub values: Vec<f64>,
    pub mean: f64,
    pub transactions_mean: f64,
}

/// Mean outcome of trading on fair coin-flip directions, `repetitions` times.
pub fn random_scenario(closes: &[f64], cost_rate: f64, initial: f64, repetitions: usize, seed: u64) -> Result<RandomScenario> {
    if repetitions == 0 {
        return Err(Error::Argument("random scenario needs at least one repetition".into()));
    }
    check_prices(closes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(repetitions);
    let mut trades = 0usize;
    for _ in 0..repetitions {
        let dirs: Vec<Direction> = (0..closes.len() - 1)
            .map(|_| if rng.random_bool(0.5) { Direction::Up } else { Direction::Down })
            .collect();
        let l = simulate_strategy(closes, &dirs, cost_rate, initial)?;
        trades += l.transactions();
        values.push(l.final_value);
    }
    let mean = values.iter().sum::<f64>() / repetitions as f64;
    Ok(RandomScenario {
        seed,
        values,
        mean,
        transactions_mean: trades as f64 / repetitions as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::*;

    #[test]
    fn frame_counts() {
        assert_eq!(make_frames(199, 60, 10).unwrap().len(), 14);
        assert_eq!(make_frames(60, 60, 10).unwrap().len(), 1);
        let f = make_frames(100, 60, 10).unwrap();
        assert_eq!(f.iter().map(|f| f.start).collect::<Vec<_>>(), vec![0, 10, 20, 30, 40]);
        assert!(matches!(make_frames(59, 60, 10), Err(Error::Range(_))));
    }

    #[test]
    fn ledger_example() {
        let l = simulate_strategy(&[100.0, 110.0, 105.0, 115.0], &[Up, Down, Up], 0.002, 1000.0).unwrap();
        let sides: Vec<Side> = l.events.iter().map(|e| e.side).collect();
        assert_eq!(sides, vec![Side::Buy, Side::Sell, Side::Buy]);
        let costs: Vec<f64> = l.events.iter().map(|e| (e.cost * 1e4).round() / 1e4).collect();
        assert_eq!(costs, vec![2.0, 2.1956, 2.1912]);
        assert_eq!((l.final_value * 100.0).round() / 100.0, 1197.55);
    }

    #[test]
    fn never_entering_keeps_cash() {
        let l = simulate_strategy(&[100.0, 90.0, 120.0], &[Down, Down], 0.002, 1000.0).unwrap();
        assert_eq!((l.final_value, l.transactions()), (1000.0, 0));
    }

    #[test]
    fn hold_examples() {
        assert_eq!(hold_scenario(&[100.0, 110.0], 0.0, 1000.0).unwrap().final_value, 1100.0);
        assert!((hold_scenario(&[100.0, 110.0], 0.002, 1000.0).unwrap().final_value - 1097.8).abs() < 1e-9);
        assert!((hold_scenario(&[50.0, 50.0, 50.0], 0.002, 1000.0).unwrap().final_value - 998.0).abs() < 1e-9);
    }

    #[test]
    fn ideal_examples() {
        let c = [100.0, 110.0, 105.0, 115.0];
        let v = ideal_scenario(&c, 0.0, 1000.0).unwrap().final_value;
        assert!((v - 1000.0 * 1.1 * 115.0 / 105.0).abs() < 1e-9);
        let fall = ideal_scenario(&[5.0, 4.0, 3.0], 0.002, 1000.0).unwrap();
        assert_eq!((fall.final_value, fall.transactions()), (1000.0, 0));
        let rise = ideal_scenario(&[1.0, 2.0, 3.0], 0.002, 1000.0).unwrap();
        assert_eq!(rise.transactions(), 1);
        assert!((rise.final_value - 1000.0 * 0.998 * 3.0).abs() < 1e-9);
    }

    #[test]
    fn random_is_seeded() {
        let c = [10.0, 11.0, 9.0, 12.0, 12.5, 8.0];
        assert_eq!(random_scenario(&c, 0.002, 1000.0, 7, 3).unwrap(), random_scenario(&c, 0.002, 1000.0, 7, 3).unwrap());
        let flat = random_scenario(&[7.0; 6], 0.0, 1000.0, 50, 1).unwrap();
        assert!(flat.values.iter().all(|v| (v - 1000.0).abs() < 1e-9));
    }
}
