use serde::{Deserialize, Serialize};

use super::MetricReport;
use crate::error::{Error, Result};
use crate::features::stats::quantile_sorted;

pub const BIN_WIDTH: f64 = 0.05;
const BINS: usize = 20;

/// Histogram of values over [0, 1]; the last bin is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub distribution: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub metrics: Vec<MetricSummary>,
}

impl Aggregate {
    pub fn get(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

pub fn aggregate(reports: &[MetricReport]) -> Result<Aggregate> {
    if reports.is_empty() {
        return Err(Error::arg("nothing to aggregate"));
    }
    let metrics = MetricReport::NAMES
        .iter()
        .enumerate()
        .map(|(j, name)| summarize(name, reports.iter().map(|r| r.values()[j]).collect()))
        .collect();
    Ok(Aggregate {
        count: reports.len(),
        metrics,
    })
}

fn summarize(name: &str, mut v: Vec<f64>) -> MetricSummary {
    let n = v.len() as f64;
    // shifted by the first value so identical inputs give exact results
    let shift = v[0];
    let offset = v.iter().map(|x| x - shift).sum::<f64>() / n;
    let mean = shift + offset;
    let std = if v.len() > 1 {
        (v.iter().map(|x| (x - shift - offset).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    v.sort_by(f64::total_cmp);
    let mut pdf = vec![0.0; BINS];
    for &x in &v {
        if (0.0..=1.0).contains(&x) {
            pdf[((x / BIN_WIDTH) as usize).min(BINS - 1)] += 1.0 / n;
        }
    }
    let cdf = pdf
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    MetricSummary {
        name: name.to_string(),
        mean,
        std,
        min: v[0],
        q1: quantile_sorted(&v, 0.25),
        median: quantile_sorted(&v, 0.5),
        q3: quantile_sorted(&v, 0.75),
        max: v[v.len() - 1],
        distribution: Distribution { pdf, cdf },
    }
}
