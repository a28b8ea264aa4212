use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sentiment::{Polarity, SentimentLabel};

const BUILTIN: &str = include_str!("../../data/lexicon.tsv");

/// Word polarities for the deterministic baseline classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    words: BTreeMap<String, i64>,
}

impl Lexicon {
    pub fn new(words: BTreeMap<String, i64>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Argument("empty lexicon".into()));
        }
        let words = words.into_iter().map(|(w, p)| (w.to_lowercase(), p)).collect();
        Ok(Lexicon { words })
    }

    /// Parses `word<whitespace>polarity` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut words = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(word), Some(pol), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Format {
                    path: origin.to_path_buf(),
                    line: i + 1,
                    message: "expected `word polarity`".into(),
                });
            };
            let pol: i64 = pol.parse().map_err(|_| Error::Format {
                path: origin.to_path_buf(),
                line: i + 1,
                message: format!("polarity `{pol}` is not an integer"),
            })?;
            words.insert(word.to_string(), pol);
        }
        Lexicon::new(words)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Lexicon::parse(&text, path)
    }

    pub fn builtin() -> Self {
        Lexicon::parse(BUILTIN, Path::new("<builtin lexicon>")).expect("built-in lexicon parses")
    }

    /// Sum of the polarities of the lowercase alphanumeric tokens in `text`.
    pub fn polarity_sum(&self, text: &str) -> i64 {
        text.to_lowercase()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .filter_map(|t| self.words.get(t))
            .sum()
    }

    pub fn classify(&self, text: &str) -> SentimentLabel {
        let s = self.polarity_sum(text);
        SentimentLabel::new(match s.cmp(&0) {
            std::cmp::Ordering::Greater => Polarity::Positive,
            std::cmp::Ordering::Less => Polarity::Negative,
            std::cmp::Ordering::Equal => Polarity::Neutral,
        })
    }
}
