//! Post-level sentiment labels and everything built on them: ensemble votes,
//! daily features, the classifier protocol, sampling and evaluation.

pub mod daily;
pub mod lexicon;
pub mod metrics;
pub mod protocol;
pub mod sampling;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TextPost;

pub use daily::{aggregate_daily, build_sentiment_features, daily_score, DailySentiment, SENTIMENT_COLUMNS};
pub use lexicon::Lexicon;
pub use metrics::{score_classifier, ClassifierMetrics};
pub use protocol::{classify_via_protocol, Classifier, ProcessClassifier};
pub use sampling::{agreement_filter, balanced_sample, eval_sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Neutral,
    Negative,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Positive, Polarity::Neutral, Polarity::Negative];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Neutral => "neutral",
            Polarity::Negative => "negative",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(Polarity::Positive),
            "neutral" => Ok(Polarity::Neutral),
            "negative" => Ok(Polarity::Negative),
            _ => Err(Error::Argument(format!("unknown sentiment label `{s}`"))),
        }
    }
}

/// Per-class probabilities reported by a classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub positive: f64,
    pub neutral: f64,
    pub negative: f64,
}

impl Scores {
    pub fn get(&self, p: Polarity) -> f64 {
        match p {
            Polarity::Positive => self.positive,
            Polarity::Neutral => self.neutral,
            Polarity::Negative => self.negative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentLabel {
    pub value: Polarity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Scores>,
}

impl SentimentLabel {
    pub fn new(value: Polarity) -> Self {
        SentimentLabel { value, scores: None }
    }

    /// Scores must sum to 1 within 1e-6 and the label must carry the highest
    /// score.
    pub fn with_scores(value: Polarity, scores: Scores) -> Result<Self> {
        let parts = [scores.positive, scores.neutral, scores.negative];
        if parts.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::Validation(format!("scores outside [0, 1]: {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Validation(format!("scores sum to {sum}, not 1")));
        }
        let max = parts.iter().copied().fold(f64::MIN, f64::max);
        if scores.get(value) < max {
            return Err(Error::Validation(format!("label {value} is not the top-scoring class")));
        }
        Ok(SentimentLabel {
            value,
            scores: Some(scores),
        })
    }
}

/// A post with its final label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPost {
    pub post: TextPost,
    pub label: Polarity,
}

/// Tie handling of the ensemble vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VoteBias {
    /// Neutral wins a tie between neutral and a polar label.
    NeutralityBiased,
    /// The polar label wins a tie with neutral.
    PolarityBiased,
}

/// Combines single-model labels. A strict plurality wins; a positive/negative
/// tie and a three-way tie give neutral; a neutral/polar tie goes to neutral
/// or to the polar label according to `bias`.
pub fn majority_vote(labels: &[Polarity], bias: VoteBias) -> Result<Polarity> {
    if labels.is_empty() {
        return Err(Error::Argument("majority vote over no labels".into()));
    }
    let mut count = [0usize; 3];
    for l in labels {
        count[l.index()] += 1;
    }
    let [pos, neu, neg] = count;
    let top = pos.max(neu).max(neg);
    let winners: Vec<Polarity> = Polarity::ALL.into_iter().filter(|p| count[p.index()] == top).collect();
    Ok(match winners.as_slice() {
        [only] => *only,
        [Polarity::Positive, Polarity::Neutral] => match bias {
            VoteBias::NeutralityBiased => Polarity::Neutral,
            VoteBias::PolarityBiased => Polarity::Positive,
        },
        [Polarity::Neutral, Polarity::Negative] => match bias {
            VoteBias::NeutralityBiased => Polarity::Neutral,
            VoteBias::PolarityBiased => Polarity::Negative,
        },
        _ => Polarity::Neutral,
    })
}
