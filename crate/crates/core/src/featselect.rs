//! Variance inflation factors and iterative elimination of collinear
//! continuous features.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::FeatureMatrix;

/// VIFs above this (R² > 1 - 1e-12) are reported as infinite.
pub const VIF_CEILING: f64 = 1e12;

/// Eigenvalues below this fraction of the largest are treated as zero.
const NULL_EIGEN: f64 = 1e-10;

/// VIF of each column on the others, in column order.
///
/// VIF_j is the j-th diagonal entry of the inverse correlation matrix, which
/// equals 1/(1 - R_j²) for the regression of column j on all other columns
/// and an intercept. It is read off the eigendecomposition of the correlation
/// matrix, so a column taking part in an exact linear dependency comes out as
/// infinity instead of a noisy huge number.
pub fn vif_columns(columns: &[&[f64]]) -> Result<Vec<f64>> {
    let p = columns.len();
    if p < 2 {
        return Err(Error::Argument(format!("VIF needs at least 2 columns, got {p}")));
    }
    let n = columns[0].len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::Argument("columns differ in length".into()));
    }
    if n < p + 1 {
        return Err(Error::Rank(format!("{n} rows cannot support a VIF over {p} columns")));
    }
    let mut z = DMatrix::<f64>::zeros(n, p);
    for (j, col) in columns.iter().enumerate() {
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("column {j} has non-finite values")));
        }
        let mean = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        if ss <= 0.0 {
            return Err(Error::ZeroVariance(format!("column {j} is constant")));
        }
        let scale = ss.sqrt();
        for (i, v) in col.iter().enumerate() {
            z[(i, j)] = (v - mean) / scale;
        }
    }
    let corr = z.transpose() * &z;
    let eig = SymmetricEigen::new(corr);
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut out = vec![0.0; p];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut v = 0.0;
        let mut singular = false;
        for k in 0..p {
            let q = eig.eigenvectors[(j, k)];
            let lambda = eig.eigenvalues[k];
            if lambda <= NULL_EIGEN * lmax {
                if q.abs() > 1e-6 {
                    singular = true;
                }
            } else {
                v += q * q / lambda;
            }
        }
        *slot = if singular || v > VIF_CEILING { f64::INFINITY } else { v.max(1.0) };
    }
    Ok(out)
}

/// VIF of every continuous column of `matrix` on the other continuous
/// columns. Dummy columns are ignored.
pub fn compute_vif(matrix: &FeatureMatrix) -> Result<BTreeMap<String, f64>> {
    let cont = matrix.continuous();
    let cols: Vec<&[f64]> = (0..cont.n_cols()).map(|j| cont.column_at(j)).collect();
    let vifs = vif_columns(&cols)?;
    Ok(cont.column_names().into_iter().zip(vifs).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub feature: String,
    /// `None` stands for an infinite VIF.
    pub vif: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifReport {
    pub cutoff: f64,
    pub removed: Vec<Removal>,
    /// Surviving continuous columns in matrix order.
    pub survivors: Vec<String>,
    /// VIFs of the survivors on the surviving set.
    pub final_vif: Vec<f64>,
}

impl VifReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cutoff\t{}", self.cutoff);
        let _ = writeln!(s, "step\tremoved\tvif");
        for (k, r) in self.removed.iter().enumerate() {
            let v = r.vif.map_or_else(|| "inf".to_string(), |v| format!("{v:.6}"));
            let _ = writeln!(s, "{}\t{}\t{}", k + 1, r.feature, v);
        }
        let _ = writeln!(s, "survivor\tvif");
        for (name, v) in self.survivors.iter().zip(&self.final_vif) {
            let _ = writeln!(s, "{name}\t{v:.6}");
        }
        s
    }
}

/// Repeatedly drops the continuous column with the largest VIF (the earliest
/// one on ties) until every remaining VIF is at most `cutoff`.
pub fn eliminate_by_vif(matrix: &FeatureMatrix, cutoff: f64) -> Result<VifReport> {
    if !(cutoff > 1.0) {
        return Err(Error::Argument(format!("VIF cutoff must exceed 1, got {cutoff}")));
    }
    let cont = matrix.continuous();
    let mut names = cont.column_names();
    let mut cols: Vec<&[f64]> = (0..cont.n_cols()).map(|j| cont.column_at(j)).collect();
    let mut removed = Vec::new();
    loop {
        if cols.len() < 2 {
            let final_vif = vec![1.0; cols.len()];
            return Ok(VifReport { cutoff, removed, survivors: names, final_vif });
        }
        let vifs = vif_columns(&cols)?;
        let mut worst = 0;
        for (j, v) in vifs.iter().enumerate() {
            if *v > vifs[worst] {
                worst = j;
            }
        }
        if vifs[worst] <= cutoff {
            return Ok(VifReport { cutoff, removed, survivors: names, final_vif: vifs });
        }
        let v = vifs[worst];
        removed.push(Removal {
            feature: names.remove(worst),
            vif: v.is_finite().then_some(v),
        });
        cols.remove(worst);
    }
}
