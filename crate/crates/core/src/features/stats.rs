use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Short names of the 21 per-channel statistics, in feature order.
pub const STAT_NAMES: [&str; 21] = [
    "μ", "Mdn", "σ", "σ²", "cov", "ran", "coran", "p25", "p75", "max", "iqr", "coi", "mad_μ",
    "mad_Mdn", "E", "P", "rms", "rss", "snr", "γ", "κ",
];

/// The 21 statistics of one channel window.
///
/// Moments are population moments, quartiles use inclusive linear
/// interpolation, kurtosis is excess kurtosis. A ratio whose denominator is
/// zero is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatFeatureSet {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub variance: f64,
    pub coeff_variation: f64,
    pub range: f64,
    pub coeff_range: f64,
    pub p25: f64,
    pub p75: f64,
    pub max: f64,
    pub iqr: f64,
    pub coeff_iqr: f64,
    pub mean_abs_dev: f64,
    pub median_abs_dev: f64,
    pub energy: f64,
    pub power: f64,
    pub rms: f64,
    pub rss: f64,
    pub snr: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl StatFeatureSet {
    pub fn to_array(&self) -> [f64; 21] {
        [
            self.mean,
            self.median,
            self.std,
            self.variance,
            self.coeff_variation,
            self.range,
            self.coeff_range,
            self.p25,
            self.p75,
            self.max,
            self.iqr,
            self.coeff_iqr,
            self.mean_abs_dev,
            self.median_abs_dev,
            self.energy,
            self.power,
            self.rms,
            self.rss,
            self.snr,
            self.skewness,
            self.kurtosis,
        ]
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Inclusive linear-interpolation quantile of already sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

pub fn stat_features(x: &[f64]) -> Result<StatFeatureSet> {
    if x.len() < 2 {
        return Err(Error::data(format!(
            "statistics need at least 2 samples, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("window contains non-finite values"));
    }
    let n = x.len() as f64;
    let s = sorted(x);
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4, mut mad) = (0.0, 0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        mad += d.abs();
    }
    let (m2, m3, m4, mean_abs_dev) = (m2 / n, m3 / n, m4 / n, mad / n);
    let std = m2.sqrt();
    let median = quantile_sorted(&s, 0.5);
    let p25 = quantile_sorted(&s, 0.25);
    let p75 = quantile_sorted(&s, 0.75);
    let (min, max) = (s[0], s[s.len() - 1]);
    let abs_dev = sorted(&x.iter().map(|v| (v - median).abs()).collect::<Vec<_>>());
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let power = energy / n;
    Ok(StatFeatureSet {
        mean,
        median,
        std,
        variance: m2,
        coeff_variation: ratio(std, mean),
        range: max - min,
        coeff_range: ratio(max - min, max + min),
        p25,
        p75,
        max,
        iqr: p75 - p25,
        coeff_iqr: ratio(p75 - p25, p75 + p25),
        mean_abs_dev,
        median_abs_dev: quantile_sorted(&abs_dev, 0.5),
        energy,
        power,
        rms: power.sqrt(),
        rss: energy.sqrt(),
        snr: ratio(mean, std),
        skewness: ratio(m3, m2.powf(1.5)),
        kurtosis: if m2 == 0.0 { 0.0 } else { m4 / (m2 * m2) - 3.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn one_to_ten() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let f = stat_features(&x).unwrap();
        assert_eq!(f.mean, 5.5);
        assert_eq!(f.max, 10.0);
        assert_eq!(f.range, 9.0);
        assert!(close(f.coeff_range, 9.0 / 11.0));
        assert_eq!(f.energy, 385.0);
        assert_eq!(f.power, 38.5);
        assert_eq!(f.median, 5.5);
        assert_eq!(f.p25, 3.25);
        assert_eq!(f.p75, 7.75);
        assert_eq!(f.iqr, 4.5);
    }

    #[test]
    fn constant_window_sentinels() {
        let f = stat_features(&[7.0; 10]).unwrap();
        assert_eq!(f.std, 0.0);
        assert_eq!(f.coeff_variation, 0.0);
        assert_eq!(f.snr, 0.0);
        assert_eq!(f.skewness, 0.0);
        assert_eq!(f.kurtosis, 0.0);
        assert_eq!(f.energy, 490.0);
    }

    #[test]
    fn textbook_set() {
        let f = stat_features(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(f.mean, 5.0);
        assert_eq!(f.std, 2.0);
        assert_eq!(f.snr, 2.5);
        assert_eq!(f.mean_abs_dev, 1.5);
    }

    #[test]
    fn zero_sum_ratios_are_zero() {
        // max + min = 0 and p75 + p25 = 0
        let f = stat_features(&[-1.0, 1.0]).unwrap();
        assert_eq!(f.coeff_range, 0.0);
        assert_eq!(f.coeff_iqr, 0.0);
        assert_eq!(f.coeff_variation, 0.0);
    }

    #[test]
    fn rejects_short_windows() {
        assert!(stat_features(&[1.0]).is_err());
        assert!(stat_features(&[]).is_err());
        assert!(stat_features(&[1.0, f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn internal_identities(x in prop::collection::vec(-100.0f64..100.0, 2..40)) {
            let f = stat_features(&x).unwrap();
            prop_assert!((f.std * f.std - f.variance).abs() <= 1e-9 * (1.0 + f.variance));
            prop_assert!((f.rms * f.rms - f.power).abs() <= 1e-9 * (1.0 + f.power));
            prop_assert!((f.rss * f.rss - f.energy).abs() <= 1e-9 * (1.0 + f.energy));
            prop_assert_eq!(f.iqr, f.p75 - f.p25);
            prop_assert!(f.p25 <= f.median && f.median <= f.p75 && f.p75 <= f.max);
        }

        #[test]
        fn positive_scaling(x in prop::collection::vec(0.5f64..100.0, 3..30), c in 0.1f64..10.0) {
            let a = stat_features(&x).unwrap().to_array();
            let y: Vec<f64> = x.iter().map(|v| v * c).collect();
            let b = stat_features(&y).unwrap().to_array();
            // μ Mdn σ ran p25 p75 max iqr mad_μ mad_Mdn rms rss scale by c
            for i in [0, 1, 2, 5, 7, 8, 9, 10, 12, 13, 16, 17] {
                prop_assert!((b[i] - c * a[i]).abs() <= 1e-9 * (1.0 + (c * a[i]).abs()), "{}", STAT_NAMES[i]);
            }
            // σ² E P scale by c²
            for i in [3, 14, 15] {
                prop_assert!((b[i] - c * c * a[i]).abs() <= 1e-9 * (1.0 + (c * c * a[i]).abs()), "{}", STAT_NAMES[i]);
            }
            // cov coran coi snr γ κ are scale-free
            for i in [4, 6, 11, 18, 19, 20] {
                prop_assert!((b[i] - a[i]).abs() <= 1e-7 * (1.0 + a[i].abs()), "{}", STAT_NAMES[i]);
            }
        }
    }
}
