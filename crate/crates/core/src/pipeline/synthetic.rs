//! Seeded synthetic market, on-chain, macro and post data, plus ready-made
//! run configurations over it. Returns follow a persistent mood process that
//! also tilts the tone of the day's posts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, NaiveDate, TimeZone, Utc, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ingest::{Currency, FeatureInventory, FilterRules, PriceSchema, Source, SourceRule, TextPost};
use crate::models::{ModelKind, ModelSpec, Task};
use crate::pipeline::config::{
    BacktestConfig, CvConfig, DataConfig, RunConfig, SelectionConfig, SentimentConfig, SplitConfig, BLOCKCHAIN_COLUMNS,
    MACRO_COLUMNS,
};

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub days: usize,
    pub seed: u64,
    pub start: NaiveDate,
    /// Upper bound on posts per day, source and currency.
    pub posts_per_day: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            days: 400,
            seed: 7,
            start: NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date"),
            posts_per_day: 4,
        }
    }
}

/// Paths of the generated configurations.
#[derive(Debug, Clone)]
pub struct SynthFiles {
    pub btc: PathBuf,
    pub btc_no_sentiment: PathBuf,
    pub eth: PathBuf,
}

const POSITIVE: [&str; 8] = ["bullish", "rally", "surge", "gains", "breakout", "adoption", "recovery", "strong"];
const NEGATIVE: [&str; 8] = ["bearish", "crash", "dump", "plunge", "selloff", "losses", "panic", "weak"];
const NEUTRAL: [&str; 5] = [
    "{c} trading volume reported for the session",
    "analysts discuss {c} network statistics",
    "{c} exchange listing schedule published",
    "weekly {c} developer call notes",
    "{c} futures open interest update",
];

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn ohlcv_csv(dates: &[NaiveDate], closes: &[f64], rng: &mut ChaCha8Rng) -> String {
    let mut s = String::from("date,open,high,low,close,adj_close,volume\n");
    let mut prev = closes[0];
    for (d, &c) in dates.iter().zip(closes) {
        let o = prev * (0.003 * normal(rng)).exp();
        let h = o.max(c) * (0.01 * normal(rng).abs()).exp();
        let l = o.min(c) * (-0.01 * normal(rng).abs()).exp();
        let v = 1e9 * (0.3 * normal(rng)).exp();
        let _ = writeln!(s, "{d},{o},{h},{l},{c},{c},{v}");
        prev = c;
    }
    s
}

fn table_csv(dates: &[NaiveDate], names: &[&str], columns: &[Vec<f64>]) -> String {
    let mut s = String::from("date");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for (i, d) in dates.iter().enumerate() {
        let _ = write!(s, "{d}");
        for c in columns {
            let _ = write!(s, ",{}", c[i]);
        }
        s.push('\n');
    }
    s
}

fn walk(n: usize, start: f64, vol: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = start;
    (0..n)
        .map(|_| {
            x *= (vol * normal(rng)).exp();
            x
        })
        .collect()
}

fn post_text(rng: &mut ChaCha8Rng, mood: f64, coin: &str) -> String {
    let tilt = 0.25 * mood.tanh();
    let u: f64 = rng.random();
    if u < 0.3 + tilt {
        let w = POSITIVE[rng.random_range(0..POSITIVE.len())];
        format!("{coin} looks {w} today")
    } else if u < 0.6 {
        let w = NEGATIVE[rng.random_range(0..NEGATIVE.len())];
        format!("{coin} {w} fears spread")
    } else {
        NEUTRAL[rng.random_range(0..NEUTRAL.len())].replace("{c}", coin)
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes the data files and three configurations (BTC, BTC without
/// sentiment, ETH) into `dir`.
pub fn generate(dir: &Path, opts: &SynthOptions) -> Result<SynthFiles> {
    if opts.days < 120 {
        return Err(Error::Argument(format!("synthetic data needs at least 120 days, got {}", opts.days)));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.days;
    let dates: Vec<NaiveDate> = (0..n).map(|i| opts.start + Days::new(i as u64)).collect();

    let mut mood = vec![0.0; n];
    for t in 1..n {
        mood[t] = 0.7 * mood[t - 1] + 0.7 * normal(&mut rng);
    }
    let mut btc = vec![30000.0; n];
    let mut eth = vec![2000.0; n];
    for t in 1..n {
        let r = 0.004 * mood[t - 1] + 0.025 * normal(&mut rng);
        btc[t] = btc[t - 1] * r.exp();
        eth[t] = eth[t - 1] * (0.8 * r + 0.015 * normal(&mut rng)).exp();
    }
    write(&dir.join("btc.csv"), &ohlcv_csv(&dates, &btc, &mut rng))?;
    write(&dir.join("eth.csv"), &ohlcv_csv(&dates, &eth, &mut rng))?;

    let chain: Vec<Vec<f64>> = (0..BLOCKCHAIN_COLUMNS.len())
        .map(|k| walk(n, 1e3 * (k + 1) as f64, 0.02, &mut rng))
        .collect();
    write(&dir.join("blockchain.csv"), &table_csv(&dates, &BLOCKCHAIN_COLUMNS, &chain))?;

    // markets close at weekends; the first day is always present
    let business: Vec<usize> = (0..n)
        .filter(|&i| i == 0 || !matches!(dates[i].weekday(), Weekday::Sat | Weekday::Sun))
        .collect();
    let m = business.len();
    let mut macro_cols: Vec<Vec<f64>> = vec![
        walk(m, 2.0, 0.01, &mut rng),
        walk(m, 1.5, 0.01, &mut rng),
        walk(m, 3500.0, 0.01, &mut rng),
        (0..m).map(|_| 0.01 * normal(&mut rng)).collect(),
        walk(m, 20.0, 0.05, &mut rng),
    ];
    macro_cols.truncate(MACRO_COLUMNS.len());
    let bdates: Vec<NaiveDate> = business.iter().map(|&i| dates[i]).collect();
    write(&dir.join("macro.csv"), &table_csv(&bdates, &MACRO_COLUMNS, &macro_cols))?;

    let mut posts = String::new();
    let mut id = 0usize;
    for (t, d) in dates.iter().enumerate() {
        for currency in Currency::ALL {
            let coin = match currency {
                Currency::Btc => "bitcoin",
                Currency::Eth => "ethereum",
            };
            for source in Source::ALL {
                let count = rng.random_range(1..=opts.posts_per_day.max(1));
                for _ in 0..count {
                    id += 1;
                    let text = if source != Source::News && rng.random_bool(0.05) {
                        format!("https://example.com/{id}")
                    } else {
                        post_text(&mut rng, mood[t], coin)
                    };
                    let hour = rng.random_range(0..24);
                    let ts = Utc.from_utc_datetime(&d.and_hms_opt(hour, 0, 0).expect("valid time"));
                    let mut engagement = BTreeMap::new();
                    match source {
                        Source::Twitter => {
                            engagement.insert("retweets".to_string(), rng.random_range(0..40));
                        }
                        Source::Reddit => {
                            engagement.insert("score".to_string(), rng.random_range(0..60));
                        }
                        Source::News => {}
                    }
                    let p = TextPost {
                        id: format!("post-{id}"),
                        timestamp: ts,
                        source,
                        currency,
                        text,
                        engagement,
                    };
                    posts.push_str(&serde_json::to_string(&p).map_err(|e| Error::Serialization(e.to_string()))?);
                    posts.push('\n');
                }
            }
        }
    }
    write(&dir.join("posts.jsonl"), &posts)?;

    let train_end = dates[n * 3 / 5];
    let btc_cfg = config(Currency::Btc, opts.seed, train_end, true, "run");
    let mut nosent = config(Currency::Btc, opts.seed, train_end, false, "run-no-sentiment");
    nosent.data.posts = None;
    let eth_cfg = config(Currency::Eth, opts.seed, train_end, true, "run-eth");
    let files = SynthFiles {
        btc: dir.join("config.toml"),
        btc_no_sentiment: dir.join("config-no-sentiment.toml"),
        eth: dir.join("config-eth.toml"),
    };
    write(&files.btc, &btc_cfg.to_toml()?)?;
    write(&files.btc_no_sentiment, &nosent.to_toml()?)?;
    write(&files.eth, &eth_cfg.to_toml()?)?;
    Ok(files)
}

fn spec(name: &str, kind: ModelKind, task: Task, grid: &[(&str, &[f64])]) -> ModelSpec {
    ModelSpec {
        name: name.into(),
        kind,
        task,
        grid: grid.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect(),
        members: Vec::new(),
        command: Vec::new(),
        seed: 0,
    }
}

/// The configuration `generate` writes for one currency.
pub fn config(currency: Currency, seed: u64, train_end: NaiveDate, sentiment: bool, out: &str) -> RunConfig {
    let (prices, other, blockchain) = match currency {
        Currency::Btc => ("btc.csv", "eth.csv", Some(PathBuf::from("blockchain.csv"))),
        Currency::Eth => ("eth.csv", "btc.csv", None),
    };
    let mut rules = BTreeMap::new();
    rules.insert(
        Source::Twitter,
        SourceRule {
            min_engagement: [("retweets".to_string(), 2)].into(),
            min_chars: 10,
            reject_url_only: true,
        },
    );
    rules.insert(
        Source::Reddit,
        SourceRule {
            min_engagement: [("score".to_string(), 3)].into(),
            min_chars: 10,
            reject_url_only: true,
        },
    );
    RunConfig {
        currency,
        seed,
        out_dir: PathBuf::from(out),
        data: DataConfig {
            prices: prices.into(),
            other_prices: Some(other.into()),
            blockchain,
            blockchain_columns: BLOCKCHAIN_COLUMNS.iter().map(|s| s.to_string()).collect(),
            macro_data: Some("macro.csv".into()),
            macro_columns: MACRO_COLUMNS.iter().map(|s| s.to_string()).collect(),
            posts: Some("posts.jsonl".into()),
            price_schema: PriceSchema::default(),
            filter: FilterRules { rules },
        },
        features: FeatureInventory::default(),
        split: SplitConfig { train_end },
        sentiment: SentimentConfig {
            enabled: sentiment,
            ..SentimentConfig::default()
        },
        selection: SelectionConfig::default(),
        cv: CvConfig::default(),
        backtest: BacktestConfig::default(),
        models: vec![
            spec("ridge", ModelKind::Ridge, Task::Regression, &[("lambda", &[1.0, 10.0, 100.0])]),
            spec(
                "tree",
                ModelKind::DecisionTree,
                Task::Classification,
                &[("max_depth", &[2.0, 3.0]), ("min_leaf", &[5.0])],
            ),
        ],
        base_dir: PathBuf::new(),
    }
}
