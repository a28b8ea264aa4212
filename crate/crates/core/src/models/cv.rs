use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::FeatureMatrix;
use crate::models::{balanced_accuracy, direction, fit_rows, score_rows, Direction, Hyper, ModelSpec, TrainedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub hyper: Hyper,
    /// Balanced accuracy per held-out fold, repeat-major.
    pub scores: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub candidates: Vec<CandidateScore>,
    pub winner: usize,
}

impl CvResult {
    pub fn best(&self) -> &CandidateScore {
        &self.candidates[self.winner]
    }
}

/// Fold number of every row. Each class is shuffled on its own and dealt
/// round-robin, so every fold holds each class within one row of its share.
pub fn stratified_folds(classes: &[Direction], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Fold(format!("need at least 2 folds, got {folds}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0; classes.len()];
    for class in [Direction::Up, Direction::Down] {
        let mut idx: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == class).collect();
        if idx.len() < folds {
            return Err(Error::Fold(format!(
                "class `{class:?}` has {} rows, too few for {folds} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            out[i] = k % folds;
        }
    }
    Ok(out)
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Repeated stratified k-fold search over the grid of `spec`, scored by the
/// balanced accuracy of predicted directions. Repeat r draws its folds with
/// seed `seed + r`. The first candidate with the highest mean wins.
pub fn cv_tune(spec: &ModelSpec, train: &FeatureMatrix, folds: usize, repeats: usize, seed: u64) -> Result<CvResult> {
    spec.validate()?;
    train.ensure_dense()?;
    if repeats == 0 {
        return Err(Error::Fold("need at least one repeat".into()));
    }
    let rows = train.rows();
    let y = train.target();
    let gold = direction(y);
    let assignments = (0..repeats)
        .map(|r| stratified_folds(&gold, folds, seed.wrapping_add(r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut candidates = Vec::new();
    for hyper in spec.candidates() {
        let mut scores = Vec::with_capacity(folds * repeats);
        for assign in &assignments {
            for k in 0..folds {
                let (mut tr_rows, mut tr_y, mut te_rows, mut te_gold) = (vec![], vec![], vec![], vec![]);
                for i in 0..rows.len() {
                    if assign[i] == k {
                        te_rows.push(rows[i].clone());
                        te_gold.push(gold[i]);
                    } else {
                        tr_rows.push(rows[i].clone());
                        tr_y.push(y[i]);
                    }
                }
                let model = TrainedModel {
                    spec: spec.clone(),
                    manifest: Vec::new(),
                    hyper: hyper.clone(),
                    params: fit_rows(spec, &tr_rows, &tr_y, &hyper)?,
                };
                let pred = direction(&score_rows(&model, &te_rows)?);
                scores.push(balanced_accuracy(&pred, &te_gold)?);
            }
        }
        let (mean, sd) = mean_sd(&scores);
        candidates.push(CandidateScore { hyper, scores, mean, sd });
    }
    let mut winner = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.mean > candidates[winner].mean {
            winner = i;
        }
    }
    Ok(CvResult {
        folds,
        repeats,
        seed,
        candidates,
        winner,
    })
}
