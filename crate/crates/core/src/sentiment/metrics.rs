use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sentiment::Polarity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMetrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Per class, in positive/neutral/negative order.
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub f1: [f64; 3],
    /// Rows are gold classes, columns predictions.
    pub confusion: [[u64; 3]; 3],
}

/// Accuracy, unweighted macro precision/recall/F1 and the confusion matrix.
/// A class that is never predicted has precision 0; a class absent from the
/// gold labels has recall 0, and both still count in the macro averages.
pub fn score_classifier(pred: &[Polarity], gold: &[Polarity]) -> Result<ClassifierMetrics> {
    if pred.len() != gold.len() {
        return Err(Error::Argument(format!(
            "{} predictions for {} gold labels",
            pred.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Argument("no labels to score".into()));
    }
    let mut confusion = [[0u64; 3]; 3];
    for (p, g) in pred.iter().zip(gold) {
        confusion[g.index()][p.index()] += 1;
    }
    let total = gold.len() as f64;
    let trace: u64 = (0..3).map(|k| confusion[k][k]).sum();
    let mut precision = [0.0; 3];
    let mut recall = [0.0; 3];
    let mut f1 = [0.0; 3];
    for k in 0..3 {
        let tp = confusion[k][k] as f64;
        let predicted: u64 = (0..3).map(|g| confusion[g][k]).sum();
        let actual: u64 = confusion[k].iter().sum();
        precision[k] = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        recall[k] = if actual > 0 { tp / actual as f64 } else { 0.0 };
        f1[k] = if precision[k] + recall[k] > 0.0 {
            2.0 * precision[k] * recall[k] / (precision[k] + recall[k])
        } else {
            0.0
        };
    }
    let mean = |v: &[f64; 3]| v.iter().sum::<f64>() / 3.0;
    Ok(ClassifierMetrics {
        accuracy: trace as f64 / total,
        macro_precision: mean(&precision),
        macro_recall: mean(&recall),
        macro_f1: mean(&f1),
        precision,
        recall,
        f1,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Polarity::*;

    #[test]
    fn identity_scores_one() {
        let g = [Positive, Neutral, Negative, Neutral];
        let m = score_classifier(&g, &g).unwrap();
        assert_eq!((m.accuracy, m.macro_f1), (1.0, 1.0));
    }

    #[test]
    fn hand_computed_confusion() {
        // gold pos: 2 right, 2 called neutral; gold neg: 1 right; gold neu: 5 right
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        for (g, p, n) in [(Positive, Positive, 2), (Positive, Neutral, 2), (Negative, Negative, 1), (Neutral, Neutral, 5)] {
            for _ in 0..n {
                gold.push(g);
                pred.push(p);
            }
        }
        let m = score_classifier(&pred, &gold).unwrap();
        assert_eq!(m.accuracy, 0.8);
        assert_eq!(m.confusion, [[2, 2, 0], [0, 5, 0], [0, 0, 1]]);
        assert!((m.macro_precision - (1.0 + 5.0 / 7.0 + 1.0) / 3.0).abs() < 1e-15);
        assert!((m.macro_recall - 2.5 / 3.0).abs() < 1e-15);
        let f1_pos = 2.0 * 0.5 / 1.5;
        let f1_neu = 2.0 * (5.0 / 7.0) / (12.0 / 7.0);
        assert!((m.macro_f1 - (f1_pos + f1_neu + 1.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn all_neutral_on_balanced_gold() {
        let gold = [Positive, Neutral, Negative];
        let m = score_classifier(&[Neutral; 3], &gold).unwrap();
        assert!((m.accuracy - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert!(score_classifier(&[Positive], &[]).is_err());
    }
}
