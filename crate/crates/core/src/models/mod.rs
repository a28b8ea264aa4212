//! Built-in learners, ensembles, cross-validated tuning and the external
//! model protocol.
//!
//! Every fitted model produces a real score per row. Regression models
//! predict the next-day return directly; classification models emit a
//! decision score whose sign is the predicted direction.

pub mod cv;
pub mod ensemble;
pub mod external;
pub mod linear;
pub mod tree;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::FeatureMatrix;

pub use cv::{cv_tune, stratified_folds, CandidateScore, CvResult};
pub use linear::{logistic_fit, perceptron_fit, ridge_fit, LinearModel, LogisticFit};
pub use tree::{DecisionTree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn of(value: f64) -> Direction {
        if value > 0.0 {
            Direction::Up
        } else {
            Direction::Down
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }
}

/// Up for positive values, down otherwise (zero included).
pub fn direction(values: &[f64]) -> Vec<Direction> {
    values.iter().map(|v| Direction::of(*v)).collect()
}

/// Mean of the per-class recalls.
pub fn balanced_accuracy(pred: &[Direction], gold: &[Direction]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::Argument(format!(
            "{} predictions for {} gold labels",
            pred.len(),
            gold.len()
        )));
    }
    let mut recall = 0.0;
    for class in [Direction::Up, Direction::Down] {
        let total = gold.iter().filter(|g| **g == class).count();
        if total == 0 {
            return Err(Error::UndefinedClass(format!("no `{class:?}` rows in the gold labels")));
        }
        let hit = pred.iter().zip(gold).filter(|(p, g)| **g == class && **p == class).count();
        recall += hit as f64 / total as f64;
    }
    Ok(recall / 2.0)
}

/// Share of positions where the two label lists agree.
pub fn accuracy(pred: &[Direction], gold: &[Direction]) -> Result<f64> {
    if pred.len() != gold.len() || gold.is_empty() {
        return Err(Error::Argument(format!(
            "cannot score {} predictions against {} labels",
            pred.len(),
            gold.len()
        )));
    }
    Ok(pred.iter().zip(gold).filter(|(p, g)| p == g).count() as f64 / gold.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Ridge,
    Logistic,
    Perceptron,
    DecisionTree,
    VotingEnsemble,
    StackingEnsemble,
    External,
}

pub type Hyper = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub kind: ModelKind,
    pub task: Task,
    /// Candidate values per hyperparameter; tuning tries the Cartesian
    /// product in key order. No keys means one candidate with the defaults.
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub members: Vec<ModelSpec>,
    /// Program and arguments serving the external model protocol.
    #[serde(default)]
    pub command: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

const KNOWN: &[(ModelKind, &[&str])] = &[
    (ModelKind::Ridge, &["lambda", "intercept"]),
    (ModelKind::Logistic, &["lambda", "max_iter", "tol"]),
    (ModelKind::Perceptron, &["epochs", "eta"]),
    (ModelKind::DecisionTree, &["max_depth", "min_leaf"]),
    (ModelKind::VotingEnsemble, &[]),
    (ModelKind::StackingEnsemble, &[]),
    (ModelKind::External, &[]),
];

impl ModelSpec {
    /// Lists every problem with the spec.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let who = &self.name;
        if let Some((_, keys)) = KNOWN.iter().find(|(k, _)| *k == self.kind) {
            if self.kind != ModelKind::External {
                for key in self.grid.keys() {
                    if !keys.contains(&key.as_str()) {
                        out.push(format!("model `{who}`: unknown hyperparameter `{key}`"));
                    }
                }
            }
        }
        for (key, values) in &self.grid {
            if values.is_empty() {
                out.push(format!("model `{who}`: empty candidate list for `{key}`"));
            }
            if values.iter().any(|v| !v.is_finite()) {
                out.push(format!("model `{who}`: non-finite candidate for `{key}`"));
            }
        }
        match self.kind {
            ModelKind::Logistic | ModelKind::Perceptron if self.task == Task::Regression => {
                out.push(format!("model `{who}`: {:?} is a classifier only", self.kind));
            }
            ModelKind::VotingEnsemble | ModelKind::StackingEnsemble => {
                if self.members.len() < 2 {
                    out.push(format!("model `{who}`: an ensemble needs at least 2 members"));
                }
                for m in &self.members {
                    if m.task != self.task {
                        out.push(format!("model `{who}`: member `{}` has a different task", m.name));
                    }
                    out.extend(m.problems());
                }
            }
            ModelKind::External if self.command.is_empty() => {
                out.push(format!("model `{who}`: external model without a command"));
            }
            _ => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Spec(p.join("; ")))
        }
    }

    /// Cartesian product of the grid, first key varying slowest.
    pub fn candidates(&self) -> Vec<Hyper> {
        let mut out = vec![Hyper::new()];
        for (key, values) in &self.grid {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for base in &out {
                for v in values {
                    let mut h = base.clone();
                    h.insert(key.clone(), *v);
                    next.push(h);
                }
            }
            out = next;
        }
        out
    }
}

fn hyper(h: &Hyper, key: &str, default: f64) -> f64 {
    h.get(key).copied().unwrap_or(default)
}

/// Learned parameters of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Params {
    Linear(LinearModel),
    Tree(DecisionTree),
    Voting { members: Vec<TrainedModel> },
    Stacking { members: Vec<TrainedModel>, combiner: LinearModel },
    /// The external server is retrained from these rows whenever the model
    /// is used, so a saved model stays self-contained.
    External {
        manifest: Vec<String>,
        rows: Vec<Vec<f64>>,
        target: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub manifest: Vec<String>,
    pub hyper: Hyper,
    pub params: Params,
}

/// Fits `spec` with its first grid candidate.
pub fn fit(spec: &ModelSpec, train: &FeatureMatrix) -> Result<TrainedModel> {
    let first = spec.candidates().into_iter().next().unwrap_or_default();
    fit_with(spec, train, &first)
}

/// Fits `spec` on every row of `train` with the given hyperparameters.
pub fn fit_with(spec: &ModelSpec, train: &FeatureMatrix, h: &Hyper) -> Result<TrainedModel> {
    train.ensure_dense()?;
    let rows = train.rows();
    let mut params = fit_rows(spec, &rows, train.target(), h)?;
    if let Params::External { manifest, .. } = &mut params {
        *manifest = train.column_names();
    }
    Ok(TrainedModel {
        spec: spec.clone(),
        manifest: train.column_names(),
        hyper: h.clone(),
        params,
    })
}

/// Class targets: +1 for a positive return, -1 otherwise.
pub fn class_target(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| Direction::of(*v).sign()).collect()
}

pub(crate) fn fit_rows(spec: &ModelSpec, rows: &[Vec<f64>], y: &[f64], h: &Hyper) -> Result<Params> {
    spec.validate()?;
    if rows.is_empty() {
        return Err(Error::InsufficientData(format!("no training rows for `{}`", spec.name)));
    }
    let target = match spec.task {
        Task::Regression => y.to_vec(),
        Task::Classification => class_target(y),
    };
    Ok(match spec.kind {
        ModelKind::Ridge => Params::Linear(ridge_fit(
            rows,
            &target,
            hyper(h, "lambda", 1.0),
            hyper(h, "intercept", 1.0) != 0.0,
        )?),
        ModelKind::Logistic => {
            let labels: Vec<bool> = target.iter().map(|v| *v > 0.0).collect();
            Params::Linear(
                logistic_fit(
                    rows,
                    &labels,
                    hyper(h, "lambda", 1e-4),
                    hyper(h, "max_iter", 500.0) as usize,
                    hyper(h, "tol", 1e-8),
                )?
                .model,
            )
        }
        ModelKind::Perceptron => Params::Linear(perceptron_fit(
            rows,
            &target,
            hyper(h, "epochs", 100.0) as usize,
            hyper(h, "eta", 1.0),
            spec.seed,
        )?),
        ModelKind::DecisionTree => {
            let p = TreeParams {
                max_depth: hyper(h, "max_depth", 3.0) as usize,
                min_leaf: (hyper(h, "min_leaf", 1.0) as usize).max(1),
            };
            Params::Tree(DecisionTree::fit(rows, &target, spec.task, p)?)
        }
        ModelKind::VotingEnsemble => ensemble::fit_voting(spec, rows, y)?,
        ModelKind::StackingEnsemble => ensemble::fit_stacking(spec, rows, y)?,
        ModelKind::External => {
            // fail early if the server cannot be trained on these rows
            let manifest: Vec<String> = (0..rows[0].len()).map(|j| format!("x{j}")).collect();
            external::ExternalModel::start_named(&spec.command, &manifest, rows, &target)?;
            Params::External {
                manifest,
                rows: rows.to_vec(),
                target,
            }
        }
    })
}

/// Raw scores for `rows`, which must follow the model's column manifest.
pub(crate) fn score_rows(model: &TrainedModel, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let task = model.spec.task;
    Ok(match &model.params {
        Params::Linear(l) => rows.iter().map(|r| l.score(r)).collect(),
        Params::Tree(t) => rows.iter().map(|r| t.predict(r)).collect(),
        Params::Voting { members } => ensemble::vote(members, rows, task)?,
        Params::Stacking { members, combiner } => ensemble::stack(members, combiner, rows, task)?,
        Params::External {
            manifest,
            rows: train,
            target,
        } => {
            let mut server = external::ExternalModel::start_named(&model.spec.command, manifest, train, target)?;
            server.predict(rows)?
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Values(Vec<f64>),
    Classes(Vec<Direction>),
}

impl Predictions {
    pub fn directions(&self) -> Vec<Direction> {
        match self {
            Predictions::Values(v) => direction(v),
            Predictions::Classes(c) => c.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Predictions::Values(v) => v.len(),
            Predictions::Classes(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn predict(model: &TrainedModel, rows: &FeatureMatrix) -> Result<Predictions> {
    let names = rows.column_names();
    if names != model.manifest {
        let missing: Vec<&String> = model.manifest.iter().filter(|c| !names.contains(c)).collect();
        let extra: Vec<&String> = names.iter().filter(|c| !model.manifest.contains(c)).collect();
        return Err(Error::Schema(format!(
            "columns do not match the training manifest of `{}` (missing {missing:?}, unexpected {extra:?})",
            model.spec.name
        )));
    }
    rows.ensure_dense()?;
    let scores = score_rows(model, &rows.rows())?;
    Ok(match model.spec.task {
        Task::Regression => Predictions::Values(scores),
        Task::Classification => Predictions::Classes(direction(&scores)),
    })
}
