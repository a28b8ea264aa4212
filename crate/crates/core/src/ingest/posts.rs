use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    News,
    Reddit,
    Twitter,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::News, Source::Reddit, Source::Twitter];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::News => "news",
            Source::Reddit => "reddit",
            Source::Twitter => "twitter",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Currency {
    Btc,
    Eth,
}

impl Currency {
    pub const ALL: [Currency; 2] = [Currency::Btc, Currency::Eth];

    pub fn as_str(self) -> &'static str {
        match self {
            Currency::Btc => "BTC",
            Currency::Eth => "ETH",
        }
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Currency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BTC" => Ok(Currency::Btc),
            "ETH" => Ok(Currency::Eth),
            _ => Err(Error::Argument(format!("unknown currency `{s}`"))),
        }
    }
}

/// A timestamped text item from one source about one currency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextPost {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub source: Source,
    pub currency: Currency,
    pub text: String,
    #[serde(default)]
    pub engagement: BTreeMap<String, i64>,
}

impl TextPost {
    /// The UTC calendar day the post belongs to.
    pub fn day(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }

    pub fn metric(&self, name: &str) -> i64 {
        self.engagement.get(name).copied().unwrap_or(0)
    }
}

/// Reads one JSON object per line. Blank lines are skipped. Posts whose text
/// is empty after trimming, or whose timestamp falls outside `range`, fail
/// validation.
pub fn load_posts(path: &Path, range: Option<(NaiveDate, NaiveDate)>) -> Result<Vec<TextPost>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut posts = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let post: TextPost = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if post.text.trim().is_empty() {
            return Err(Error::Validation(format!(
                "{}: line {}: post `{}` has empty text",
                path.display(),
                i + 1,
                post.id
            )));
        }
        if let Some((start, end)) = range {
            let day = post.day();
            if day < start || day > end {
                return Err(Error::Validation(format!(
                    "{}: line {}: post `{}` dated {day} outside {start}..={end}",
                    path.display(),
                    i + 1,
                    post.id
                )));
            }
        }
        posts.push(post);
    }
    Ok(posts)
}

/// Thresholds applied to one source.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SourceRule {
    /// Minimum value per engagement metric; a missing metric counts as 0.
    pub min_engagement: BTreeMap<String, i64>,
    pub min_chars: usize,
    pub reject_url_only: bool,
}

/// Per-source filter rules. Sources without a rule pass unchanged, and news
/// always passes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterRules {
    #[serde(default)]
    pub rules: BTreeMap<Source, SourceRule>,
}

fn is_bare_url(text: &str) -> bool {
    let t = text.trim();
    !t.contains(char::is_whitespace)
        && (t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www."))
}

pub fn filter_posts(posts: &[TextPost], rules: &FilterRules) -> Vec<TextPost> {
    posts
        .iter()
        .filter(|p| {
            if p.source == Source::News {
                return true;
            }
            let Some(rule) = rules.rules.get(&p.source) else {
                return true;
            };
            if rule.reject_url_only && is_bare_url(&p.text) {
                return false;
            }
            if p.text.trim().chars().count() < rule.min_chars {
                return false;
            }
            rule.min_engagement
                .iter()
                .all(|(metric, &min)| p.metric(metric) >= min)
        })
        .cloned()
        .collect()
}
