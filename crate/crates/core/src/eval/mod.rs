//! Verification metrics, the per-subject fold protocol, threshold sweeps
//! and report aggregation. The valid user is the positive class.

mod aggregate;
mod curve;
mod folds;

pub use aggregate::{aggregate, Aggregate, Distribution, MetricSummary, BIN_WIDTH};
pub use curve::{eer, threshold_sweep, CurvePoint, Eer, THRESHOLD_STEPS};
pub use folds::{
    leakage_count, plan_folds, FoldPlan, RowRef, GROUPS_PER_SUBJECT, GROUP_SIZE, TEST_PER_IMPOSTER,
    TRAIN_PER_IMPOSTER,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        ConfusionCounts { tp, fn_, fp, tn }
    }

    /// `accepted[i]` is the decision, `valid[i]` the truth.
    pub fn from_predictions(accepted: &[bool], valid: &[bool]) -> Self {
        let mut c = ConfusionCounts::default();
        for (&a, &v) in accepted.iter().zip(valid) {
            match (v, a) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    pub fn rmse(&self) -> f64 {
        ((self.fp + self.fn_) as f64 / self.total() as f64).sqrt()
    }

    pub fn far(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }

    pub fn frr(&self) -> f64 {
        ratio(self.fn_, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        if self.tp == 0 {
            return if self.fp == 0 && self.fn_ == 0 { 1.0 } else { 0.0 };
        }
        (2 * self.tp) as f64 / (2 * self.tp + self.fp + self.fn_) as f64
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub acc: f64,
    pub rmse: f64,
    pub far: f64,
    pub frr: f64,
    pub f1: f64,
    pub auc_roc: f64,
}

impl MetricReport {
    pub const NAMES: [&'static str; 6] = ["ACC", "RMSE", "FAR", "FRR", "F1", "AUC_ROC"];

    pub fn values(&self) -> [f64; 6] {
        [self.acc, self.rmse, self.far, self.frr, self.f1, self.auc_roc]
    }
}

/// Scalar metrics of a confusion matrix; AUC is filled in as NaN.
pub fn metrics(counts: &ConfusionCounts) -> Result<MetricReport> {
    if counts.total() == 0 {
        return Err(Error::arg("confusion counts are all zero"));
    }
    Ok(MetricReport {
        acc: counts.accuracy(),
        rmse: counts.rmse(),
        far: counts.far(),
        frr: counts.frr(),
        f1: counts.f1(),
        auc_roc: f64::NAN,
    })
}

/// Full report for one test set: accept iff `score ≥ threshold`.
pub fn evaluate_scores(scores: &[f64], valid: &[bool], threshold: f64) -> Result<MetricReport> {
    let accepted: Vec<bool> = scores.iter().map(|&s| s >= threshold).collect();
    let mut r = metrics(&ConfusionCounts::from_predictions(&accepted, valid))?;
    r.auc_roc = roc_auc(scores, valid)?;
    Ok(r)
}

/// Area under the ROC curve, built by sweeping the threshold down through
/// the distinct scores; tied scores move together.
pub fn roc_auc(scores: &[f64], valid: &[bool]) -> Result<f64> {
    if scores.len() != valid.len() {
        return Err(Error::arg("scores and labels differ in length"));
    }
    let pos = valid.iter().filter(|&&v| v).count();
    let neg = valid.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::data("ROC AUC needs both valid and imposter rows"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::data("NaN score"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut prev_tpr, mut prev_fpr) = (0.0, 0.0);
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if valid[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let tpr = tp as f64 / pos as f64;
        let fpr = fp as f64 / neg as f64;
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    Ok(area)
}
