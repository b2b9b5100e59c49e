//! Univariate feature scoring, top-K selection and standardization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 20;

/// One-way ANOVA F statistic of a feature column split by a binary label.
///
/// Zero within-group variance with non-zero between-group variance scores
/// `+inf`; a column with neither scores 0.
pub fn f_score(column: &[f64], labels: &[bool]) -> Result<f64> {
    if column.len() != labels.len() {
        return Err(Error::arg("feature column and labels differ in length"));
    }
    let n1 = labels.iter().filter(|&&l| l).count();
    let n0 = labels.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::data("F score needs both classes present"));
    }
    // Work relative to the first value so constant columns give exact zeros.
    let origin = column[0];
    let (mut s0, mut s1) = (0.0, 0.0);
    for (&x, &l) in column.iter().zip(labels) {
        if l {
            s1 += x - origin;
        } else {
            s0 += x - origin;
        }
    }
    let (m0, m1) = (s0 / n0 as f64, s1 / n1 as f64);
    let grand = (s0 + s1) / labels.len() as f64;
    let between = n0 as f64 * (m0 - grand).powi(2) + n1 as f64 * (m1 - grand).powi(2);
    let within: f64 = column
        .iter()
        .zip(labels)
        .map(|(&x, &l)| (x - origin - if l { m1 } else { m0 }).powi(2))
        .sum();
    let df_within = (labels.len() - 2) as f64;
    Ok(if within == 0.0 || df_within == 0.0 {
        if between > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        between / (within / df_within)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    #[serde(with = "extended_reals")]
    pub scores: Vec<f64>,
    /// Indices of the kept features, best first.
    pub kept: Vec<usize>,
}

impl SelectionResult {
    /// Ranks `scores` descending (ties to the lower index) and keeps `k`.
    pub fn top_k(scores: Vec<f64>, k: usize) -> Result<Self> {
        if k == 0 || k > scores.len() {
            return Err(Error::arg(format!(
                "cannot keep {k} of {} features",
                scores.len()
            )));
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        order.truncate(k);
        Ok(SelectionResult { scores, kept: order })
    }

    pub fn project(&self, row: &[f64]) -> Vec<f64> {
        self.kept.iter().map(|&i| row[i]).collect()
    }

    pub fn project_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.project(r)).collect()
    }
}

/// JSON has no infinities; non-finite scores travel as strings.
mod extended_reals {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Real {
        Finite(f64),
        Named(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|&x| {
                if x.is_finite() {
                    Real::Finite(x)
                } else {
                    Real::Named(x.to_string())
                }
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Real>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Real::Finite(x) => Ok(x),
                Real::Named(s) => s.parse().map_err(serde::de::Error::custom),
            })
            .collect()
    }
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

fn width(rows: &[Vec<f64>]) -> Result<usize> {
    let w = rows.first().map(Vec::len).ok_or_else(|| Error::data("empty feature matrix"))?;
    if rows.iter().any(|r| r.len() != w) {
        return Err(Error::data("ragged feature matrix"));
    }
    Ok(w)
}

/// Keeps the `k` features with the highest F score against `labels`.
pub fn select_k(rows: &[Vec<f64>], labels: &[bool], k: usize) -> Result<SelectionResult> {
    let w = width(rows)?;
    if k > w {
        return Err(Error::arg(format!("K = {k} exceeds the {w} available features")));
    }
    let scores = (0..w)
        .map(|j| f_score(&column(rows, j), labels))
        .collect::<Result<Vec<_>>>()?;
    SelectionResult::top_k(scores, k)
}

/// Label-free selection for one-class models: keeps the `k` features with
/// the largest raw training variance.
pub fn select_by_variance(rows: &[Vec<f64>], k: usize) -> Result<SelectionResult> {
    let w = width(rows)?;
    if k > w {
        return Err(Error::arg(format!("K = {k} exceeds the {w} available features")));
    }
    let scores = (0..w).map(|j| column_moments(&column(rows, j)).1.powi(2)).collect();
    SelectionResult::top_k(scores, k)
}

/// Population mean and standard deviation; constant columns come back with
/// their exact value and a zero deviation.
fn column_moments(col: &[f64]) -> (f64, f64) {
    if col.iter().all(|&v| v == col[0]) {
        return (col[0], 0.0);
    }
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-feature standardization fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let w = width(rows).map_err(|_| Error::data("cannot fit a scaler on an empty training set"))?;
        let (mean, std) = (0..w).map(|j| column_moments(&column(rows, j))).unzip();
        Ok(Scaler { mean, std })
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / if *s > 0.0 { *s } else { 1.0 })
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }

    pub fn fit_transform(rows: &[Vec<f64>]) -> Result<(Self, Vec<Vec<f64>>)> {
        let s = Scaler::fit(rows)?;
        let t = s.transform_all(rows);
        Ok((s, t))
    }
}
