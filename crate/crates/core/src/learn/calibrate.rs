use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sigmoid map from a decision value to the probability of the valid
/// class: `1 / (1 + exp(A f + B))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub a: f64,
    pub b: f64,
}

impl Calibration {
    /// Fixed map used when there is nothing to fit against.
    pub const FALLBACK: Calibration = Calibration { a: -1.0, b: 0.0 };
    /// Fixed map for one-class models, which never see imposter data.
    pub const ONE_CLASS: Calibration = Calibration { a: -2.0, b: 0.0 };

    pub fn confidence(&self, f: f64) -> f64 {
        let z = self.a * f + self.b;
        // Split on sign so neither branch overflows.
        if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        }
    }
}

fn objective(dec: &[f64], target: &[f64], a: f64, b: f64) -> f64 {
    dec.iter()
        .zip(target)
        .map(|(&f, &t)| {
            let z = f * a + b;
            if z >= 0.0 {
                t * z + (-z).exp().ln_1p()
            } else {
                (t - 1.0) * z + z.exp().ln_1p()
            }
        })
        .sum()
}

/// Regularized maximum-likelihood sigmoid fit (Newton's method with
/// backtracking, smoothed targets `(N₊+1)/(N₊+2)` and `1/(N₋+2)`).
///
/// `valid[i]` marks decision values that belong to the valid user.
pub fn calibrate(decision_values: &[f64], valid: &[bool]) -> Result<Calibration> {
    const MAX_ITER: usize = 100;
    const MIN_STEP: f64 = 1e-10;
    const SIGMA: f64 = 1e-12;
    const EPS: f64 = 1e-5;

    if decision_values.len() != valid.len() {
        return Err(Error::arg("decision values and labels differ in length"));
    }
    let prior1 = valid.iter().filter(|&&v| v).count() as f64;
    let prior0 = valid.len() as f64 - prior1;
    if prior1 == 0.0 || prior0 == 0.0 {
        return Err(Error::data("calibration needs both classes present"));
    }
    if decision_values.iter().all(|&f| f == decision_values[0]) {
        return Ok(Calibration::FALLBACK);
    }
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let target: Vec<f64> = valid.iter().map(|&v| if v { hi } else { lo }).collect();
    let dec = decision_values;

    let mut a = 0.0;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
    let mut fval = objective(dec, &target, a, b);
    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (SIGMA, SIGMA, 0.0, 0.0, 0.0);
        for (&f, &t) in dec.iter().zip(&target) {
            let z = f * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = t - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < EPS && g2.abs() < EPS {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(dec, &target, na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if step < MIN_STEP {
            break;
        }
    }
    if !a.is_finite() || !b.is_finite() {
        return Ok(Calibration::FALLBACK);
    }
    Ok(Calibration { a, b })
}
