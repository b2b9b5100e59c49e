use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Per-class Gaussian statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub prior: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl ClassStats {
    fn fit(rows: &[&Vec<f64>], total: usize) -> Self {
        let n = rows.len() as f64;
        let w = rows[0].len();
        let mean: Vec<f64> = (0..w).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let var = (0..w)
            .map(|j| {
                let v = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                v.max(VARIANCE_FLOOR)
            })
            .collect();
        ClassStats {
            prior: n / total as f64,
            mean,
            var,
        }
    }

    fn log_joint(&self, x: &[f64]) -> f64 {
        let ll: f64 = x
            .iter()
            .zip(self.mean.iter().zip(&self.var))
            .map(|(v, (m, s2))| -0.5 * ((2.0 * std::f64::consts::PI * s2).ln() + (v - m).powi(2) / s2))
            .sum();
        self.prior.ln() + ll
    }
}

/// Gaussian naive Bayes over the valid (`true`) and imposter classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub valid: ClassStats,
    pub imposter: ClassStats,
}

impl NaiveBayesModel {
    pub fn train(rows: &[Vec<f64>], labels: &[bool]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::arg("rows and labels differ in length"));
        }
        let valid: Vec<&Vec<f64>> = rows.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).collect();
        let imposter: Vec<&Vec<f64>> = rows.iter().zip(labels).filter(|(_, &l)| !l).map(|(r, _)| r).collect();
        if valid.is_empty() || imposter.is_empty() {
            return Err(Error::data("naive Bayes needs both classes present"));
        }
        Ok(NaiveBayesModel {
            valid: ClassStats::fit(&valid, rows.len()),
            imposter: ClassStats::fit(&imposter, rows.len()),
        })
    }

    /// Posterior probability of the valid class.
    pub fn valid_probability(&self, x: &[f64]) -> f64 {
        let (a, b) = (self.valid.log_joint(x), self.imposter.log_joint(x));
        1.0 / (1.0 + (b - a).exp())
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.valid_probability(x) >= 0.5
    }
}
