use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of 0.01 steps from θ = 0 to θ = 1.
pub const THRESHOLD_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

/// FAR and FRR at θ = 0.00, 0.01, …, 1.00, accepting iff `score ≥ θ`.
pub fn threshold_sweep(scores: &[f64], valid: &[bool]) -> Result<Vec<CurvePoint>> {
    if scores.len() != valid.len() {
        return Err(Error::arg("scores and labels differ in length"));
    }
    let mut pos: Vec<f64> = scores.iter().zip(valid).filter(|(_, &v)| v).map(|(&s, _)| s).collect();
    let mut neg: Vec<f64> = scores.iter().zip(valid).filter(|(_, &v)| !v).map(|(&s, _)| s).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::data("threshold sweep needs both valid and imposter rows"));
    }
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    let below = |v: &[f64], t: f64| v.partition_point(|&s| s < t) as f64;
    Ok((0..=THRESHOLD_STEPS)
        .map(|i| {
            let threshold = i as f64 / THRESHOLD_STEPS as f64;
            CurvePoint {
                threshold,
                far: 1.0 - below(&neg, threshold) / neg.len() as f64,
                frr: below(&pos, threshold) / pos.len() as f64,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eer {
    pub threshold: f64,
    pub rate: f64,
    /// The curves never cross; the point of smallest |FAR − FRR| is given.
    pub no_crossing: bool,
}

/// Equal error rate by linear interpolation at the first sign change of
/// FAR − FRR.
pub fn eer(curve: &[CurvePoint]) -> Result<Eer> {
    if curve.is_empty() {
        return Err(Error::arg("empty curve"));
    }
    let d = |p: &CurvePoint| p.far - p.frr;
    for (i, p) in curve.iter().enumerate() {
        if d(p) == 0.0 {
            return Ok(Eer {
                threshold: p.threshold,
                rate: p.far,
                no_crossing: false,
            });
        }
        if let Some(q) = curve.get(i + 1) {
            if d(p).signum() != d(q).signum() && d(q) != 0.0 {
                let t = d(p) / (d(p) - d(q));
                let lerp = |a: f64, b: f64| a + t * (b - a);
                return Ok(Eer {
                    threshold: lerp(p.threshold, q.threshold),
                    rate: lerp(p.far, q.far),
                    no_crossing: false,
                });
            }
        }
    }
    let best = curve
        .iter()
        .min_by(|a, b| d(a).abs().total_cmp(&d(b).abs()))
        .expect("non-empty");
    Ok(Eer {
        threshold: best.threshold,
        rate: (best.far + best.frr) / 2.0,
        no_crossing: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(threshold: f64, far: f64, frr: f64) -> CurvePoint {
        CurvePoint { threshold, far, frr }
    }

    #[test]
    fn symmetric_interpolation() {
        let e = eer(&[pt(0.4, 0.2, 0.0), pt(0.6, 0.0, 0.2)]).unwrap();
        assert!((e.threshold - 0.5).abs() < 1e-12);
        assert!((e.rate - 0.1).abs() < 1e-12);
        assert!(!e.no_crossing);
    }

    #[test]
    fn no_crossing_is_flagged() {
        let e = eer(&[pt(0.0, 0.5, 0.1), pt(0.5, 0.4, 0.2), pt(1.0, 0.35, 0.3)]).unwrap();
        assert!(e.no_crossing);
        assert_eq!(e.threshold, 1.0);
    }

    #[test]
    fn sweep_endpoints_and_monotone() {
        let scores = [0.1, 0.4, 0.35, 0.8, 0.9, 0.65];
        let valid = [false, false, true, true, true, false];
        let c = threshold_sweep(&scores, &valid).unwrap();
        assert_eq!(c.len(), 101);
        assert_eq!((c[0].far, c[0].frr), (1.0, 0.0));
        assert_eq!((c[100].far, c[100].frr), (0.0, 1.0));
        for w in c.windows(2) {
            assert!(w[1].far <= w[0].far && w[1].frr >= w[0].frr);
        }
        // accept iff score ≥ θ: a score exactly at θ is accepted
        let c = threshold_sweep(&[0.5, 0.5], &[true, false]).unwrap();
        assert_eq!((c[50].far, c[50].frr), (1.0, 0.0));
        assert_eq!((c[51].far, c[51].frr), (0.0, 1.0));
    }
}
