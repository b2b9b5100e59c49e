use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// k-nearest-neighbour vote with Minkowski p = 2 distance. Labels are
/// `true` for the valid user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl KnnModel {
    pub fn train(rows: &[Vec<f64>], labels: &[bool], k: usize) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::arg("rows and labels differ in length"));
        }
        if k == 0 || k > rows.len() {
            return Err(Error::arg(format!("k = {k} with {} training rows", rows.len())));
        }
        Ok(KnnModel {
            k,
            rows: rows.to_vec(),
            labels: labels.to_vec(),
        })
    }

    /// Fraction of the `k` nearest neighbours that are valid. Equal
    /// distances are ordered by training index.
    pub fn valid_fraction(&self, x: &[f64]) -> f64 {
        let mut d: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k;
        d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let votes = d[..k].iter().filter(|(_, i)| self.labels[*i]).count();
        votes as f64 / k as f64
    }

    /// Majority vote; a tie goes to the valid class.
    pub fn predict(&self, x: &[f64]) -> bool {
        self.valid_fraction(x) >= 0.5
    }
}
