//! Stage orchestration. Every stage reads its predecessors' artifacts from
//! the run directory, writes its own under `<run>/<stage>/` and finishes by
//! writing `manifest.json` there.

pub mod compare;
pub mod config;
pub mod manifest;
pub mod synthetic;

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::backtest::report::{baseline_table, models_table, plot_data, summarize, summary_table, ModelResult};
use crate::backtest::{
    date_frames, gain_ratio_distribution, hold_scenario, ideal_scenario, make_frames, random_scenario,
    simulate_strategy, Frame,
};
use crate::error::{Error, Result};
use crate::featselect::{eliminate_by_vif, VifReport};
use crate::ingest::{
    assemble_matrix, filter_posts, load_daily_table, load_posts, load_price_series, read_matrix, split_train_test,
    standardize, write_matrix, AssemblyInputs, ColumnKind, FeatureMatrix, PriceSeries, TextPost,
};
use crate::models::cv::{cv_tune, CvResult};
use crate::models::{accuracy, direction, fit_with, predict, TrainedModel};
use crate::sentiment::{
    aggregate_daily, build_sentiment_features, classify_via_protocol, majority_vote, Classifier, DailySentiment,
    LabeledPost, Lexicon, Polarity, ProcessClassifier,
};

pub use compare::{compare, Comparison};
pub use config::RunConfig;
pub use manifest::{Manifest, FORMAT_VERSION, MANIFEST_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Label,
    Features,
    Select,
    Train,
    Backtest,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Label,
        Stage::Features,
        Stage::Select,
        Stage::Train,
        Stage::Backtest,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Label => "label",
            Stage::Features => "features",
            Stage::Select => "select",
            Stage::Train => "train",
            Stage::Backtest => "backtest",
            Stage::Report => "report",
        }
    }

    /// Stages whose artifacts this one reads under `cfg`.
    pub fn requires(self, cfg: &RunConfig) -> Vec<Stage> {
        match self {
            Stage::Ingest => vec![],
            Stage::Label => vec![Stage::Ingest],
            Stage::Features if cfg.sentiment.enabled => vec![Stage::Ingest, Stage::Label],
            Stage::Features => vec![Stage::Ingest],
            Stage::Select => vec![Stage::Features],
            Stage::Train | Stage::Backtest => {
                let mut v = vec![Stage::Features];
                if cfg.selection.apply {
                    v.push(Stage::Select);
                }
                if self == Stage::Backtest {
                    v.push(Stage::Train);
                }
                v
            }
            Stage::Report => vec![Stage::Backtest],
        }
    }

    /// Whether `run all` executes this stage under `cfg`.
    pub fn enabled(self, cfg: &RunConfig) -> bool {
        self != Stage::Label || cfg.sentiment.enabled
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Stage> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown stage `{s}`")))
    }
}

/// Filtered posts and their counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub currency: String,
    pub price_rows: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub posts_read: usize,
    pub posts_kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub id: String,
    pub label: Polarity,
    /// One label per configured classifier.
    pub votes: Vec<Polarity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub feature_set: String,
    pub rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub columns: usize,
    pub continuous: usize,
    pub dummies: usize,
    pub column_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub model: TrainedModel,
    pub cv: CvResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestResults {
    pub currency: String,
    pub feature_set: String,
    pub columns: usize,
    pub frames: Vec<Frame>,
    /// Final wallet value per frame for each benchmark.
    pub ideal: Vec<f64>,
    pub hold: Vec<f64>,
    /// Mean over the random repetitions.
    pub random: Vec<f64>,
    pub models: Vec<ModelResult>,
}

/// Collects a stage's outputs and their hashes.
struct StageDir {
    root: PathBuf,
    stage: Stage,
    dir: PathBuf,
    outputs: BTreeMap<String, String>,
}

impl StageDir {
    /// Clears the stage directory, leaving `keep` in place.
    fn open(root: &Path, stage: Stage, keep: &[&str]) -> Result<StageDir> {
        let dir = root.join(stage.name());
        if dir.exists() {
            let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
            for entry in entries {
                let entry = entry.map_err(|e| Error::io(dir.display().to_string(), e))?;
                let name = entry.file_name();
                if keep.iter().any(|k| name == *k) {
                    continue;
                }
                let p = entry.path();
                let r = if p.is_dir() { std::fs::remove_dir_all(&p) } else { std::fs::remove_file(&p) };
                r.map_err(|e| Error::io(p.display().to_string(), e))?;
            }
        }
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        Ok(StageDir {
            root: root.to_path_buf(),
            stage,
            dir,
            outputs: BTreeMap::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str) -> Result<()> {
        let p = self.path(name);
        let rel = format!("{}/{}", self.stage.name(), name);
        self.outputs.insert(rel, manifest::sha256_file(&p)?);
        Ok(())
    }

    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let p = self.path(name);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
        std::fs::write(&p, bytes).map_err(|e| Error::io(p.display().to_string(), e))?;
        self.record(name)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
        text.push('\n');
        self.write(name, text)
    }

    fn finish(self, cfg: &RunConfig, inputs: BTreeMap<String, String>) -> Result<Manifest> {
        let m = Manifest {
            format_version: FORMAT_VERSION,
            stage: self.stage.name().to_string(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            inputs,
            outputs: self.outputs,
        };
        m.write(&self.root.join(self.stage.name()).join(MANIFEST_FILE))?;
        Ok(m)
    }
}

fn manifest_path(root: &Path, stage: Stage) -> PathBuf {
    root.join(stage.name()).join(MANIFEST_FILE)
}

/// Reads a finished stage's manifest, or fails naming the missing stage.
pub fn require(root: &Path, stage: Stage, needed: Stage) -> Result<Manifest> {
    let p = manifest_path(root, needed);
    if !p.is_file() {
        return Err(Error::Dependency {
            stage: stage.name().to_string(),
            requires: needed.name().to_string(),
        });
    }
    Manifest::read(&p)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn to_jsonl<T: Serialize>(items: &[T]) -> Result<String> {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it).map_err(|e| Error::Serialization(e.to_string()))?);
        s.push('\n');
    }
    Ok(s)
}

/// Executes the given stages in order after checking the configuration.
pub fn run(cfg: &RunConfig, stages: &[Stage]) -> Result<Vec<Manifest>> {
    cfg.validate()?;
    stages.iter().map(|s| run_stage(cfg, *s)).collect()
}

/// Every stage enabled under `cfg`.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<Manifest>> {
    let stages: Vec<Stage> = Stage::ALL.into_iter().filter(|s| s.enabled(cfg)).collect();
    run(cfg, &stages)
}

pub fn run_stage(cfg: &RunConfig, stage: Stage) -> Result<Manifest> {
    let root = cfg.out();
    let mut inputs = BTreeMap::new();
    for need in stage.requires(cfg) {
        let m = require(&root, stage, need)?;
        inputs.extend(m.outputs);
    }
    match stage {
        Stage::Ingest => ingest(cfg, &root),
        Stage::Label => label(cfg, &root, inputs),
        Stage::Features => features(cfg, &root, inputs),
        Stage::Select => select(cfg, &root, inputs),
        Stage::Train => train(cfg, &root, inputs),
        Stage::Backtest => backtest(cfg, &root, inputs),
        Stage::Report => report(cfg, &root, inputs),
    }
}

fn load_prices(cfg: &RunConfig) -> Result<PriceSeries> {
    load_price_series(&cfg.resolve(&cfg.data.prices), &cfg.data.price_schema)
}

fn ingest(cfg: &RunConfig, root: &Path) -> Result<Manifest> {
    let mut inputs = BTreeMap::new();
    let mut hash = |label: &str, p: &Option<PathBuf>| -> Result<()> {
        if let Some(p) = p {
            inputs.insert(label.to_string(), manifest::sha256_file(&cfg.resolve(p))?);
        }
        Ok(())
    };
    hash("prices", &Some(cfg.data.prices.clone()))?;
    hash("other_prices", &cfg.data.other_prices)?;
    hash("blockchain", &cfg.data.blockchain)?;
    hash("macro_data", &cfg.data.macro_data)?;
    hash("posts", &cfg.data.posts)?;

    // load everything once so malformed inputs fail here
    let prices = load_prices(cfg)?;
    if let Some(p) = &cfg.data.other_prices {
        load_price_series(&cfg.resolve(p), &cfg.data.price_schema)?;
    }
    if let Some(p) = &cfg.data.blockchain {
        load_daily_table(&cfg.resolve(p), &cfg.data.blockchain_columns)?;
    }
    if let Some(p) = &cfg.data.macro_data {
        load_daily_table(&cfg.resolve(p), &cfg.data.macro_columns)?;
    }
    let (read, kept) = match &cfg.data.posts {
        Some(p) => {
            let all = load_posts(&cfg.resolve(p), None)?;
            let mine: Vec<TextPost> = all.iter().filter(|p| p.currency == cfg.currency).cloned().collect();
            (all.len(), filter_posts(&mine, &cfg.data.filter))
        }
        None => (0, Vec::new()),
    };

    let mut dir = StageDir::open(root, Stage::Ingest, &[])?;
    dir.write("posts.jsonl", to_jsonl(&kept)?)?;
    let dates = prices.dates();
    dir.write_json(
        "summary.json",
        &IngestSummary {
            currency: cfg.currency.to_string(),
            price_rows: prices.len(),
            first_date: dates[0],
            last_date: dates[dates.len() - 1],
            posts_read: read,
            posts_kept: kept.len(),
        },
    )?;
    dir.finish(cfg, inputs)
}

fn classifier_for(cfg: &RunConfig, c: &config::ClassifierConfig) -> Result<Box<dyn Classifier>> {
    Ok(match c {
        config::ClassifierConfig::Lexicon { path: None } => Box::new(Lexicon::builtin()),
        config::ClassifierConfig::Lexicon { path: Some(p) } => Box::new(Lexicon::load(&cfg.resolve(p))?),
        config::ClassifierConfig::External { command } => {
            Box::new(ProcessClassifier::spawn(command, cfg.sentiment.batch_size)?)
        }
    })
}

fn label(cfg: &RunConfig, root: &Path, inputs: BTreeMap<String, String>) -> Result<Manifest> {
    let posts = load_posts(&root.join("ingest/posts.jsonl"), None)?;
    let mut votes: Vec<Vec<Polarity>> = vec![Vec::new(); posts.len()];
    for c in &cfg.sentiment.classifiers {
        let mut clf = classifier_for(cfg, c)?;
        let labels = classify_via_protocol(clf.as_mut(), &posts)?;
        for (v, l) in votes.iter_mut().zip(labels) {
            v.push(l.value);
        }
    }
    let mut records = Vec::with_capacity(posts.len());
    let mut labeled = Vec::with_capacity(posts.len());
    for (post, v) in posts.into_iter().zip(votes) {
        let label = majority_vote(&v, cfg.sentiment.bias)?;
        records.push(LabelRecord {
            id: post.id.clone(),
            label,
            votes: v,
        });
        labeled.push(LabeledPost { post, label });
    }
    let calendar = load_prices(cfg)?.dates();
    let daily = aggregate_daily(&labeled, &calendar);

    let mut dir = StageDir::open(root, Stage::Label, &[])?;
    dir.write("labels.jsonl", to_jsonl(&records)?)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for d in &daily {
        w.serialize(d).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    dir.write("daily.csv", bytes)?;
    dir.finish(cfg, inputs)
}

fn read_daily(path: &Path) -> Result<Vec<DailySentiment>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Serialization(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .enumerate()
        .map(|(i, rec)| {
            rec.map_err(|e| Error::Format {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Assembles the unstandardized matrix from the configured inputs.
pub fn assemble_from_config(cfg: &RunConfig, daily: Option<&[DailySentiment]>) -> Result<FeatureMatrix> {
    let prices = load_prices(cfg)?;
    let other = match &cfg.data.other_prices {
        Some(p) => Some(load_price_series(&cfg.resolve(p), &cfg.data.price_schema)?),
        None => None,
    };
    let blockchain = match &cfg.data.blockchain {
        Some(p) => Some(load_daily_table(&cfg.resolve(p), &cfg.data.blockchain_columns)?),
        None => None,
    };
    let macro_table = match &cfg.data.macro_data {
        Some(p) => Some(load_daily_table(&cfg.resolve(p), &cfg.data.macro_columns)?),
        None => None,
    };
    let sentiment = match daily {
        Some(d) => Some(build_sentiment_features(d, &prices.dates())?),
        None => None,
    };
    assemble_matrix(
        &AssemblyInputs {
            prices: &prices,
            other: other.as_ref(),
            blockchain: blockchain.as_ref(),
            macro_table: macro_table.as_ref(),
            sentiment: sentiment.as_deref(),
        },
        &cfg.features,
    )
}

fn features(cfg: &RunConfig, root: &Path, inputs: BTreeMap<String, String>) -> Result<Manifest> {
    let daily = if cfg.sentiment.enabled {
        Some(read_daily(&root.join("label/daily.csv"))?)
    } else {
        None
    };
    let raw = assemble_from_config(cfg, daily.as_deref())?;
    let matrix = standardize(&raw, cfg.split.train_end)?;
    let train_rows = matrix.rows_through(cfg.split.train_end);
    if train_rows == matrix.n_rows() {
        return Err(Error::Range(format!(
            "no rows after the training period ending {}",
            cfg.split.train_end
        )));
    }
    let continuous = matrix.columns().iter().filter(|c| c.kind == ColumnKind::Continuous).count();
    let mut dir = StageDir::open(root, Stage::Features, &[])?;
    write_matrix(&matrix, &dir.path("matrix.csv"))?;
    dir.record("matrix.csv")?;
    dir.record("matrix.csv.meta.toml")?;
    dir.write_json(
        "summary.json",
        &FeatureSummary {
            feature_set: cfg.feature_set().to_string(),
            rows: matrix.n_rows(),
            train_rows,
            test_rows: matrix.n_rows() - train_rows,
            columns: matrix.n_cols(),
            continuous,
            dummies: matrix.n_cols() - continuous,
            column_names: matrix.column_names(),
        },
    )?;
    dir.finish(cfg, inputs)
}

fn select(cfg: &RunConfig, root: &Path, inputs: BTreeMap<String, String>) -> Result<Manifest> {
    let matrix = read_matrix(&root.join("features/matrix.csv"))?;
    let train = matrix.slice_rows(0, matrix.rows_through(cfg.split.train_end));
    let report = eliminate_by_vif(&train, cfg.selection.vif_cutoff)?;
    let mut dir = StageDir::open(root, Stage::Select, &[])?;
    dir.write("vif.tsv", report.to_text())?;
    dir.write_json("vif.json", &report)?;
    dir.finish(cfg, inputs)
}

/// The standardized matrix, minus the VIF-eliminated columns when selection
/// is applied.
fn model_matrix(cfg: &RunConfig, root: &Path) -> Result<FeatureMatrix> {
    let matrix = read_matrix(&root.join("features/matrix.csv"))?;
    if !cfg.selection.apply {
        return Ok(matrix);
    }
    let report: VifReport = read_json(&root.join("select/vif.json"))?;
    let drop: Vec<String> = report.removed.into_iter().map(|r| r.feature).collect();
    matrix.drop_columns(&drop)
}

fn train(cfg: &RunConfig, root: &Path, inputs: BTreeMap<String, String>) -> Result<Manifest> {
    let matrix = model_matrix(cfg, root)?;
    let (train, _) = split_train_test(&matrix, cfg.split.train_end)?;
    let mut artifacts = Vec::new();
    for spec in &cfg.models {
        let cv = cv_tune(spec, &train, cfg.cv.folds, cfg.cv.repeats, cfg.seed)?;
        let model = fit_with(spec, &train, &cv.best().hyper)?;
        artifacts.push(ModelArtifact { model, cv });
    }
    let mut dir = StageDir::open(root, Stage::Train, &[])?;
    for a in &artifacts {
        dir.write_json(&format!("models/{}.json", a.model.spec.name), a)?;
    }
    dir.finish(cfg, inputs)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn backtest(cfg: &RunConfig, root: &Path, inputs: BTreeMap<String, String>) -> Result<Manifest> {
    let b = &cfg.backtest;
    let matrix = model_matrix(cfg, root)?;
    let (_, test) = split_train_test(&matrix, cfg.split.train_end)?;
    let closes = load_prices(cfg)?.select(test.dates(), "prices")?.closes();
    let mut frames = make_frames(test.n_rows(), b.frame_len, b.shift)?;
    date_frames(&mut frames, test.dates())?;

    let mut ideal = Vec::with_capacity(frames.len());
    let mut hold = Vec::with_capacity(frames.len());
    let mut random = Vec::with_capacity(frames.len());
    for (k, f) in frames.iter().enumerate() {
        let c = &closes[f.range()];
        ideal.push(ideal_scenario(c, b.cost_rate, b.initial)?.final_value);
        hold.push(hold_scenario(c, b.cost_rate, b.initial)?.final_value);
        let seed = cfg.seed.wrapping_add(k as u64);
        random.push(random_scenario(c, b.cost_rate, b.initial, b.random_repetitions, seed)?.mean);
    }

    let gold = direction(test.target());
    let mut results = Vec::with_capacity(cfg.models.len());
    let mut plots = Vec::with_capacity(cfg.models.len());
    for spec in &cfg.models {
        let art: ModelArtifact = read_json(&root.join(format!("train/models/{}.json", spec.name)))?;
        let dirs = predict(&art.model, &test)?.directions();
        let mut values = Vec::with_capacity(frames.len());
        let mut trades = Vec::with_capacity(frames.len());
        let mut costs = Vec::with_capacity(frames.len());
        for f in &frames {
            let l = simulate_strategy(&closes[f.range()], &dirs[f.range()], b.cost_rate, b.initial)?;
            values.push(l.final_value);
            trades.push(l.transactions() as f64);
            costs.push(l.total_cost());
        }
        let whole = simulate_strategy(&closes, &dirs, b.cost_rate, b.initial)?;
        plots.push((spec.name.clone(), plot_data(test.dates(), &closes, &dirs, &whole)?));
        results.push(ModelResult {
            currency: cfg.currency.to_string(),
            model: spec.name.clone(),
            task: spec.task,
            feature_set: cfg.feature_set().to_string(),
            cv_accuracy: art.cv.best().mean,
            test_accuracy: accuracy(&dirs, &gold)?,
            cost_rate: b.cost_rate,
            transactions_mean: mean(&trades),
            cost_mean: mean(&costs),
            vs_random: gain_ratio_distribution(&values, &random)?,
            vs_hold: gain_ratio_distribution(&values, &hold)?,
            frame_values: values,
        });
    }

    let mut dir = StageDir::open(root, Stage::Backtest, &[])?;
    dir.write_json(
        "results.json",
        &BacktestResults {
            currency: cfg.currency.to_string(),
            feature_set: cfg.feature_set().to_string(),
            columns: matrix.n_cols(),
            frames,
            ideal,
            hold,
            random,
            models: results,
        },
    )?;
    for (name, text) in plots {
        dir.write(&format!("plot/{name}.tsv"), text)?;
    }
    dir.finish(cfg, inputs)
}

pub const REPORT_TABLES: [&str; 3] = ["models.tsv", "summary.tsv", "baselines.tsv"];

fn report(cfg: &RunConfig, root: &Path, inputs: BTreeMap<String, String>) -> Result<Manifest> {
    let res: BacktestResults = read_json(&root.join("backtest/results.json"))?;
    let mut scenarios: Vec<(&str, &[f64])> = vec![("ideal", &res.ideal), ("hold", &res.hold), ("random", &res.random)];
    for m in &res.models {
        scenarios.push((&m.model, &m.frame_values));
    }
    let tables = [
        models_table(&res.models),
        summary_table(&summarize(&res.models)?),
        baseline_table(&res.currency, &scenarios),
    ];

    // Reports are never overwritten: a differing earlier set moves to history/.
    let dir_path = root.join(Stage::Report.name());
    let old_manifest = manifest_path(root, Stage::Report);
    if old_manifest.is_file() {
        let changed = REPORT_TABLES.iter().zip(&tables).any(|(name, text)| {
            std::fs::read(dir_path.join(name)).map_or(true, |old| old != text.as_bytes())
        });
        if changed {
            let id = &manifest::sha256_file(&old_manifest)?[..12];
            let hist = dir_path.join("history").join(id);
            std::fs::create_dir_all(&hist).map_err(|e| Error::io(hist.display().to_string(), e))?;
            for name in REPORT_TABLES.iter().chain([&"vif.tsv", &MANIFEST_FILE]) {
                let from = dir_path.join(name);
                if from.is_file() {
                    std::fs::rename(&from, hist.join(name)).map_err(|e| Error::io(from.display().to_string(), e))?;
                }
            }
        }
    }

    let mut dir = StageDir::open(root, Stage::Report, &["history"])?;
    for (name, text) in REPORT_TABLES.iter().zip(&tables) {
        dir.write(name, text)?;
    }
    let vif = root.join("select/vif.tsv");
    let mut inputs = inputs;
    if vif.is_file() {
        let text = std::fs::read(&vif).map_err(|e| Error::io(vif.display().to_string(), e))?;
        inputs.insert("select/vif.tsv".into(), manifest::sha256_file(&vif)?);
        dir.write("vif.tsv", text)?;
    }
    dir.finish(cfg, inputs)
}

/// Renders the stages' manifests as a short human summary.
pub fn describe(manifests: &[Manifest]) -> String {
    let mut out = String::new();
    for m in manifests {
        let _ = writeln!(out, "{}\t{} file(s)", m.stage, m.outputs.len());
    }
    out
}
