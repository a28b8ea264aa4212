use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::{Currency, FeatureInventory, FilterRules, PriceSchema};
use crate::models::ModelSpec;
use crate::sentiment::VoteBias;

pub const BLOCKCHAIN_COLUMNS: [&str; 9] = [
    "avg_block_size_7d",
    "est_transaction_volume",
    "hash_rate_7d",
    "market_cap",
    "miners_revenue",
    "n_transactions",
    "n_transactions_7d",
    "difficulty",
    "tx_per_block",
];

pub const MACRO_COLUMNS: [&str; 5] = ["breakeven_5y", "tbill_7m", "sp500_close", "sp500_return", "vix"];

fn blockchain_default() -> Vec<String> {
    BLOCKCHAIN_COLUMNS.iter().map(|s| s.to_string()).collect()
}

fn macro_default() -> Vec<String> {
    MACRO_COLUMNS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub prices: PathBuf,
    /// The paired currency, needed by the lagged technicals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other_prices: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blockchain: Option<PathBuf>,
    #[serde(default = "blockchain_default")]
    pub blockchain_columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub macro_data: Option<PathBuf>,
    #[serde(default = "macro_default")]
    pub macro_columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posts: Option<PathBuf>,
    #[serde(default)]
    pub price_schema: PriceSchema,
    #[serde(default)]
    pub filter: FilterRules,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    /// Last date of the training period.
    pub train_end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClassifierConfig {
    /// Word-list classifier; the built-in list unless `path` is given.
    Lexicon {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
    /// A process speaking the classifier protocol.
    External { command: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentimentConfig {
    /// Without sentiment the label stage is skipped and its six columns are
    /// left out of the matrix.
    pub enabled: bool,
    pub bias: VoteBias,
    pub batch_size: usize,
    pub classifiers: Vec<ClassifierConfig>,
}

impl Default for SentimentConfig {
    fn default() -> Self {
        SentimentConfig {
            enabled: true,
            bias: VoteBias::PolarityBiased,
            batch_size: 64,
            classifiers: vec![ClassifierConfig::Lexicon { path: None }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub vif_cutoff: f64,
    /// Drop the eliminated columns before training. Otherwise the VIF pass
    /// is only reported.
    pub apply: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            vif_cutoff: 5.0,
            apply: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { folds: 5, repeats: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestConfig {
    pub frame_len: usize,
    pub shift: usize,
    pub cost_rate: f64,
    pub initial: f64,
    pub random_repetitions: usize,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            frame_len: 60,
            shift: 10,
            cost_rate: crate::backtest::DEFAULT_COST,
            initial: crate::backtest::INITIAL_WALLET,
            random_repetitions: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub currency: Currency,
    /// Root of every stochastic stage.
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    pub data: DataConfig,
    #[serde(default)]
    pub features: FeatureInventory,
    pub split: SplitConfig,
    #[serde(default)]
    pub sentiment: SentimentConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default)]
    pub backtest: BacktestConfig,
    pub models: Vec<ModelSpec>,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("run")
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<RunConfig> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    /// Reads and validates a configuration file.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let cfg = RunConfig::parse(&text, &base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Resolves a configured path against the configuration's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    /// `all`, or `no-sentiment` when the sentiment columns are left out.
    pub fn feature_set(&self) -> &'static str {
        if self.sentiment.enabled {
            "all"
        } else {
            "no-sentiment"
        }
    }

    /// SHA-256 of the canonical JSON form. Where the run is stored does not
    /// enter the hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("configuration serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Every problem with the configuration at once.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut need = |label: &str, p: &Option<PathBuf>| {
            if let Some(p) = p {
                let full = self.resolve(p);
                if !full.is_file() {
                    out.push(format!("data.{label}: `{}` does not exist", full.display()));
                }
            }
        };
        need("prices", &Some(self.data.prices.clone()));
        need("other_prices", &self.data.other_prices);
        need("blockchain", &self.data.blockchain);
        need("macro_data", &self.data.macro_data);
        need("posts", &self.data.posts);

        if self.currency == Currency::Eth && self.data.blockchain.is_some() {
            out.push("data.blockchain: blockchain inputs are only used for BTC".into());
        }
        if self.features.lagged_technicals && self.data.other_prices.is_none() {
            out.push("features.lagged_technicals needs data.other_prices".into());
        }
        if self.features.lags.iter().any(|&k| k > 2) {
            out.push(format!("features.lags must lie in 0..=2, got {:?}", self.features.lags));
        }
        if self.sentiment.enabled {
            if self.data.posts.is_none() {
                out.push("sentiment is enabled but data.posts is not set".into());
            }
            if self.sentiment.classifiers.is_empty() {
                out.push("sentiment.classifiers is empty".into());
            }
            if self.sentiment.batch_size == 0 {
                out.push("sentiment.batch_size must be positive".into());
            }
            for (i, c) in self.sentiment.classifiers.iter().enumerate() {
                match c {
                    ClassifierConfig::Lexicon { path: Some(p) } if !self.resolve(p).is_file() => {
                        out.push(format!("sentiment.classifiers[{i}]: lexicon `{}` does not exist", p.display()));
                    }
                    ClassifierConfig::External { command } if command.is_empty() => {
                        out.push(format!("sentiment.classifiers[{i}]: empty command"));
                    }
                    _ => {}
                }
            }
        }
        if !(self.selection.vif_cutoff > 1.0) {
            out.push(format!("selection.vif_cutoff must exceed 1, got {}", self.selection.vif_cutoff));
        }
        if self.cv.folds < 2 {
            out.push(format!("cv.folds must be at least 2, got {}", self.cv.folds));
        }
        if self.cv.repeats == 0 {
            out.push("cv.repeats must be positive".into());
        }
        let b = &self.backtest;
        if b.frame_len < 2 {
            out.push(format!("backtest.frame_len must be at least 2, got {}", b.frame_len));
        }
        if b.shift == 0 {
            out.push("backtest.shift must be positive".into());
        }
        if !(0.0..1.0).contains(&b.cost_rate) {
            out.push(format!("backtest.cost_rate must lie in [0, 1), got {}", b.cost_rate));
        }
        if !(b.initial > 0.0) {
            out.push(format!("backtest.initial must be positive, got {}", b.initial));
        }
        if b.random_repetitions == 0 {
            out.push("backtest.random_repetitions must be positive".into());
        }
        if self.models.is_empty() {
            out.push("no models configured".into());
        }
        let mut names = BTreeSet::new();
        for m in &self.models {
            if !names.insert(m.name.as_str()) {
                out.push(format!("model name `{}` is used twice", m.name));
            }
            if m.name.is_empty() || !m.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                out.push(format!("model name `{}` must be non-empty and use only letters, digits, `-` and `_`", m.name));
            }
            out.extend(m.problems());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p))
        }
    }
}
