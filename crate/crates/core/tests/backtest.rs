mod common;

use proptest::prelude::*;
use rand::Rng;
use sentitrade::backtest::{
    hold_scenario, ideal_scenario, make_frames, random_scenario, simulate_strategy, Side, TradeLedger,
};
use sentitrade::models::Direction;

fn random_path(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut p = rng.random_range(10.0..1000.0);
    (0..n)
        .map(|_| {
            p *= 1.0 + rng.random_range(-0.15..0.15);
            p
        })
        .collect()
}

fn random_dirs(rng: &mut impl Rng, n: usize) -> Vec<Direction> {
    (0..n).map(|_| if rng.random_bool(0.5) { Direction::Up } else { Direction::Down }).collect()
}

/// Recomputes the final value from the event list alone.
fn replay(l: &TradeLedger, closes: &[f64]) -> f64 {
    let mut fiat = l.initial;
    let mut coins = 0.0;
    for e in &l.events {
        match e.side {
            Side::Buy => {
                assert_eq!(e.notional, fiat);
                coins = e.notional * (1.0 - l.cost_rate) / e.price;
                fiat = 0.0;
            }
            Side::Sell => {
                assert_eq!(e.notional, coins * e.price);
                fiat = e.notional * (1.0 - l.cost_rate);
                coins = 0.0;
            }
        }
        assert_eq!(e.cost, l.cost_rate * e.notional);
    }
    fiat + coins * closes[closes.len() - 1]
}

fn alternates(l: &TradeLedger) -> bool {
    l.events
        .iter()
        .enumerate()
        .all(|(k, e)| e.side == if k % 2 == 0 { Side::Buy } else { Side::Sell })
}

#[test]
fn ideal_equals_exhaustive_search() {
    let mut rng = common::rng(2024);
    for k in 0..200 {
        let n = 1 + k % 12;
        let closes = random_path(&mut rng, n);
        let cost = [0.0, 0.002, 0.01, 0.05][k % 4];
        let dp = ideal_scenario(&closes, cost, 1000.0).unwrap();
        assert_eq!(dp.final_value, common::brute_force_ideal(&closes, cost, 1000.0), "path {k}: {closes:?}");
        assert!(alternates(&dp));
        assert_eq!(replay(&dp, &closes), dp.final_value);
    }
}

#[test]
fn ten_day_ideal_with_zero_cost_trades_every_swing() {
    let closes = [5.0, 4.0, 6.0, 7.0, 3.0, 3.5, 2.0, 8.0, 9.0, 1.0];
    let dp = ideal_scenario(&closes, 0.0, 1000.0).unwrap();
    assert_eq!(dp.final_value, common::brute_force_ideal(&closes, 0.0, 1000.0));
    // buy at each local minimum, sell at the next local maximum
    let expected = 1000.0 * (7.0 / 4.0) * (3.5 / 3.0) * (9.0 / 2.0);
    assert!((dp.final_value - expected).abs() < 1e-9);
    let days: Vec<usize> = dp.events.iter().map(|e| e.day).collect();
    assert_eq!(days, vec![1, 3, 4, 5, 6, 8]);
}

#[test]
fn hand_traced_ledger() {
    let l = simulate_strategy(
        &[100.0, 110.0, 105.0, 115.0],
        &[Direction::Up, Direction::Down, Direction::Up],
        0.002,
        1000.0,
    )
    .unwrap();
    assert_eq!(format!("{:.2}", l.final_value), "1197.55");
    let coins_after_sell: f64 = 1000.0 * 0.998 / 100.0;
    let fiat = coins_after_sell * 110.0 * 0.998;
    assert!((fiat * 0.998 - 1093.4132).abs() < 1e-4);
    let costs: Vec<String> = l.events.iter().map(|e| format!("{:.4}", e.cost)).collect();
    assert_eq!(costs, ["2.0000", "2.1956", "2.1912"]);
    assert!((l.total_cost() - (2.0 + 2.1956 + 2.1912)).abs() < 1e-3);

    let perfect = simulate_strategy(
        &[100.0, 110.0, 105.0, 115.0],
        &[Direction::Up, Direction::Down, Direction::Up],
        0.0,
        1000.0,
    )
    .unwrap();
    assert_eq!(perfect.final_value, common::brute_force_ideal(&[100.0, 110.0, 105.0, 115.0], 0.0, 1000.0));
    assert_eq!(format!("{:.2}", perfect.final_value), "1204.76");
}

#[test]
fn dominance_and_cost_monotonicity() {
    let mut rng = common::rng(7);
    for k in 0..1000 {
        let n = 2 + k % 40;
        let closes = random_path(&mut rng, n);
        let dirs = random_dirs(&mut rng, n - 1);
        let mut last = f64::INFINITY;
        for cost in [0.0, 0.001, 0.002, 0.01, 0.1] {
            let s = simulate_strategy(&closes, &dirs, cost, 1000.0).unwrap();
            let ideal = ideal_scenario(&closes, cost, 1000.0).unwrap().final_value;
            let hold = hold_scenario(&closes, cost, 1000.0).unwrap().final_value;
            assert!(ideal >= s.final_value && ideal >= hold && ideal >= 1000.0, "path {k} cost {cost}");
            assert!(s.final_value <= last, "path {k}: value rose with cost");
            last = s.final_value;
            assert!(alternates(&s));
            assert_eq!(replay(&s, &closes), s.final_value);
        }
    }
}

#[test]
fn frame_count_matches_enumeration() {
    for test_len in 1..=80 {
        for frame_len in 1..=test_len {
            for shift in 1..=25 {
                let frames = make_frames(test_len, frame_len, shift).unwrap();
                let direct: Vec<usize> = (0..test_len).step_by(shift).filter(|s| s + frame_len <= test_len).collect();
                assert_eq!(frames.iter().map(|f| f.start).collect::<Vec<_>>(), direct);
                assert!(frames.iter().all(|f| f.len == frame_len && f.range().end <= test_len));
            }
        }
    }
    assert_eq!(make_frames(199, 60, 10).unwrap().len(), 14);
}

proptest! {
    #[test]
    fn random_scenario_is_reproducible(seed in 0u64..1000, reps in 1usize..20) {
        let mut rng = common::rng(seed);
        let closes = random_path(&mut rng, 15);
        let a = random_scenario(&closes, 0.002, 1000.0, reps, seed).unwrap();
        prop_assert_eq!(&a, &random_scenario(&closes, 0.002, 1000.0, reps, seed).unwrap());
        prop_assert_eq!(a.values.len(), reps);
        let ideal = ideal_scenario(&closes, 0.002, 1000.0).unwrap().final_value;
        prop_assert!(a.values.iter().all(|v| *v <= ideal));
    }
}
