use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{Currency, Source};
use crate::sentiment::{LabeledPost, Polarity};

/// Indices where the two label lists agree.
pub fn agreement_filter(a: &[Polarity], b: &[Polarity]) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!("label lists differ in length: {} vs {}", a.len(), b.len())));
    }
    Ok((0..a.len()).filter(|&i| a[i] == b[i]).collect())
}

type Stratum = (Polarity, Source, Currency);

fn all_strata() -> Vec<Stratum> {
    let mut out = Vec::with_capacity(18);
    for l in Polarity::ALL {
        for s in Source::ALL {
            for c in Currency::ALL {
                out.push((l, s, c));
            }
        }
    }
    out
}

fn stratum_of(p: &LabeledPost) -> Stratum {
    (p.label, p.post.source, p.post.currency)
}

/// Picks `target` of the `pool` indices, spread evenly over the 18
/// label × source × currency strata. Strata that run short hand their share
/// to the others, visiting strata in a seed-fixed order. Returned indices are
/// sorted.
fn balanced_indices(posts: &[LabeledPost], pool: &[usize], target: usize, seed: u64) -> Result<Vec<usize>> {
    if target > pool.len() {
        return Err(Error::Capacity(format!(
            "asked for {target} posts but only {} are available",
            pool.len()
        )));
    }
    let strata = all_strata();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members: Vec<Vec<usize>> = strata
        .iter()
        .map(|s| pool.iter().copied().filter(|&i| stratum_of(&posts[i]) == *s).collect())
        .collect();
    for m in members.iter_mut() {
        m.shuffle(&mut rng);
    }
    let mut order: Vec<usize> = (0..strata.len()).collect();
    order.shuffle(&mut rng);

    let mut quota = vec![0usize; strata.len()];
    let mut allocated = 0;
    while allocated < target {
        for &s in &order {
            if allocated == target {
                break;
            }
            if quota[s] < members[s].len() {
                quota[s] += 1;
                allocated += 1;
            }
        }
    }
    let mut picked: Vec<usize> = members
        .iter()
        .zip(&quota)
        .flat_map(|(m, &q)| m[..q].iter().copied())
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

/// A label × source × currency balanced subset of `target` posts, in input
/// order. Deterministic for a fixed seed.
pub fn balanced_sample(posts: &[LabeledPost], target: usize, seed: u64) -> Result<Vec<LabeledPost>> {
    let pool: Vec<usize> = (0..posts.len()).collect();
    Ok(balanced_indices(posts, &pool, target, seed)?
        .into_iter()
        .map(|i| posts[i].clone())
        .collect())
}

pub const EVAL_THIRDS: [&str; 3] = ["all models agree", "context model differs from weak label", "base models disagree"];

/// Draws a manual-evaluation sample in three equal parts (the first parts take
/// any remainder): posts on which every model agrees, posts on which the
/// context model differs from the weak label, and posts on which the first
/// three models all disagree. `posts` carry the weak labels; `predictions`
/// holds one label list per model and `context` indexes the context model.
/// Each part is balanced as in [`balanced_sample`] and no post is drawn twice.
pub fn eval_sample(
    posts: &[LabeledPost],
    predictions: &[Vec<Polarity>],
    context: usize,
    target: usize,
    seed: u64,
) -> Result<[Vec<LabeledPost>; 3]> {
    if predictions.len() < 3 {
        return Err(Error::Argument(format!("need at least 3 models, got {}", predictions.len())));
    }
    if context >= predictions.len() {
        return Err(Error::Argument(format!("context model index {context} out of range")));
    }
    if let Some(p) = predictions.iter().find(|p| p.len() != posts.len()) {
        return Err(Error::Argument(format!("{} predictions for {} posts", p.len(), posts.len())));
    }
    let n = posts.len();
    let pools: [Vec<usize>; 3] = [
        (0..n)
            .filter(|&i| predictions.iter().all(|p| p[i] == predictions[0][i]))
            .collect(),
        (0..n).filter(|&i| predictions[context][i] != posts[i].label).collect(),
        (0..n)
            .filter(|&i| {
                let (a, b, c) = (predictions[0][i], predictions[1][i], predictions[2][i]);
                a != b && b != c && a != c
            })
            .collect(),
    ];
    let mut taken: BTreeSet<usize> = BTreeSet::new();
    let mut out: [Vec<LabeledPost>; 3] = Default::default();
    for (k, pool) in pools.iter().enumerate() {
        let share = target / 3 + usize::from(k < target % 3);
        let free: Vec<usize> = pool.iter().copied().filter(|i| !taken.contains(i)).collect();
        if free.is_empty() {
            return Err(Error::Capacity(format!("no eligible posts for part `{}`", EVAL_THIRDS[k])));
        }
        let picked = balanced_indices(posts, &free, share, seed.wrapping_add(k as u64)).map_err(|e| match e {
            Error::Capacity(m) => Error::Capacity(format!("part `{}`: {m}", EVAL_THIRDS[k])),
            other => other,
        })?;
        taken.extend(picked.iter().copied());
        out[k] = picked.into_iter().map(|i| posts[i].clone()).collect();
    }
    Ok(out)
}
