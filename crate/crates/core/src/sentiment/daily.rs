use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Source;
use crate::sentiment::{LabeledPost, Polarity};

pub const SENTIMENT_COLUMNS: [&str; 6] = [
    "count_news",
    "count_tweets",
    "count_reddit",
    "score_news",
    "score_tweets",
    "score_reddit",
];

/// Label counts and score for one day and source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySentiment {
    pub date: NaiveDate,
    pub source: Source,
    pub pos: u64,
    pub neu: u64,
    pub neg: u64,
    pub score: f64,
}

impl DailySentiment {
    pub fn total(&self) -> u64 {
        self.pos + self.neu + self.neg
    }
}

/// `(pos - neg) / (pos + neu + neg)`, and 0 for a day without posts.
pub fn daily_score(pos: u64, neu: u64, neg: u64) -> f64 {
    let total = pos + neu + neg;
    if total == 0 {
        0.0
    } else {
        (pos as f64 - neg as f64) / total as f64
    }
}

/// One record per calendar date and source, ordered by date then source.
/// Posts dated outside the calendar are ignored.
pub fn aggregate_daily(posts: &[LabeledPost], calendar: &[NaiveDate]) -> Vec<DailySentiment> {
    let mut counts: BTreeMap<(NaiveDate, Source), [u64; 3]> = BTreeMap::new();
    for d in calendar {
        for s in Source::ALL {
            counts.insert((*d, s), [0; 3]);
        }
    }
    for lp in posts {
        if let Some(c) = counts.get_mut(&(lp.post.day(), lp.post.source)) {
            c[lp.label.index()] += 1;
        }
    }
    counts
        .into_iter()
        .map(|((date, source), c)| DailySentiment {
            date,
            source,
            pos: c[Polarity::Positive.index()],
            neu: c[Polarity::Neutral.index()],
            neg: c[Polarity::Negative.index()],
            score: daily_score(
                c[Polarity::Positive.index()],
                c[Polarity::Neutral.index()],
                c[Polarity::Negative.index()],
            ),
        })
        .collect()
}

fn column_suffix(s: Source) -> &'static str {
    match s {
        Source::News => "news",
        Source::Twitter => "tweets",
        Source::Reddit => "reddit",
    }
}

/// Daily post counts and scores per source, one value per calendar date, in
/// the order of [`SENTIMENT_COLUMNS`].
pub fn build_sentiment_features(daily: &[DailySentiment], calendar: &[NaiveDate]) -> Result<Vec<(String, Vec<f64>)>> {
    let index: BTreeMap<(NaiveDate, Source), &DailySentiment> =
        daily.iter().map(|d| ((d.date, d.source), d)).collect();
    let order = [Source::News, Source::Twitter, Source::Reddit];
    let mut counts: Vec<Vec<f64>> = vec![Vec::with_capacity(calendar.len()); 3];
    let mut scores: Vec<Vec<f64>> = vec![Vec::with_capacity(calendar.len()); 3];
    let mut problems = Vec::new();
    for d in calendar {
        for (k, s) in order.iter().enumerate() {
            match index.get(&(*d, *s)) {
                Some(rec) => {
                    counts[k].push(rec.total() as f64);
                    scores[k].push(rec.score);
                }
                None => {
                    if problems.len() < 10 {
                        problems.push(format!("no {} sentiment record for {d}", s));
                    }
                    counts[k].push(0.0);
                    scores[k].push(0.0);
                }
            }
        }
    }
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let mut out = Vec::with_capacity(6);
    for (k, s) in order.iter().enumerate() {
        out.push((format!("count_{}", column_suffix(*s)), std::mem::take(&mut counts[k])));
    }
    for (k, s) in order.iter().enumerate() {
        out.push((format!("score_{}", column_suffix(*s)), std::mem::take(&mut scores[k])));
    }
    Ok(out)
}
