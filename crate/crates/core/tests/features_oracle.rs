mod common;

use common::{gaussian, rng, stat_oracle};
use rand::Rng;
use std::f64::consts::PI;
use wearauth_core::features::{dct_matrix, frame_count, stat_features, MfccConfig, MfccExtractor};

fn random_window(r: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    let n = r.random_range(2..=40);
    match r.random_range(0..4) {
        0 => vec![r.random_range(-5.0..5.0); n],
        1 => (0..n).map(|_| 70.0 + 8.0 * gaussian(r)).collect(),
        2 => (0..n).map(|_| r.random_range(-20.0..20.0)).collect(),
        _ => (0..n).map(|_| (r.random_range(0..5) as f64) - 2.0).collect(),
    }
}

#[test]
fn statistics_match_direct_definitions() {
    let mut r = rng(42);
    for _ in 0..1000 {
        let x = random_window(&mut r);
        let got = stat_features(&x).unwrap().to_array();
        let want = stat_oracle(&x);
        for (k, (g, w)) in got.iter().zip(&want).enumerate() {
            assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0), "stat {k} on {x:?}: {g} vs {w}");
        }
    }
}

/// Log-mel energies and DCT computed with a naive DFT.
fn mfcc_oracle(x: &[f64], cfg: &MfccConfig) -> Vec<f64> {
    let n = cfg.frame_len;
    let mut e: Vec<f64> = (0..x.len()).map(|i| x[i] - if i > 0 { cfg.pre_emphasis * x[i - 1] } else { 0.0 }).collect();
    if e.len() < n {
        e.resize(n, 0.0);
    }
    let frames = (e.len() - n) / cfg.hop + 1;
    let sr = f64::from(cfg.sample_rate);
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let inv = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let m = cfg.mel_filters;
    let pts: Vec<f64> = (0..m + 2).map(|i| inv(mel(sr / 2.0) * i as f64 / (m + 1) as f64)).collect();
    let mut mean = vec![0.0; cfg.coefficients];
    for f in 0..frames {
        let seg: Vec<f64> = (0..n)
            .map(|i| e[f * cfg.hop + i] * (0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()))
            .collect();
        let power: Vec<f64> = (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, v) in seg.iter().enumerate() {
                    let ang = -2.0 * PI * (k * i % n) as f64 / n as f64;
                    re += v * ang.cos();
                    im += v * ang.sin();
                }
                re * re + im * im
            })
            .collect();
        let logmel: Vec<f64> = (0..m)
            .map(|j| {
                let en: f64 = power
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        let hz = k as f64 * sr / n as f64;
                        let w = if hz > pts[j] && hz <= pts[j + 1] {
                            (hz - pts[j]) / (pts[j + 1] - pts[j])
                        } else if hz > pts[j + 1] && hz < pts[j + 2] {
                            (pts[j + 2] - hz) / (pts[j + 2] - pts[j + 1])
                        } else {
                            0.0
                        };
                        w * p
                    })
                    .sum();
                en.max(cfg.log_floor).ln()
            })
            .collect();
        for (c, slot) in mean.iter_mut().enumerate() {
            let s = if c == 0 { (1.0 / m as f64).sqrt() } else { (2.0 / m as f64).sqrt() };
            *slot += logmel
                .iter()
                .enumerate()
                .map(|(i, l)| s * l * (PI * c as f64 * (2 * i + 1) as f64 / (2 * m) as f64).cos())
                .sum::<f64>();
        }
    }
    mean.iter().map(|v| v / frames as f64).collect()
}

#[test]
fn mfcc_matches_naive_dft_pipeline() {
    let cfg = MfccConfig::default();
    let mut r = rng(3);
    let x: Vec<f64> = (0..3072)
        .map(|i| 0.3 * (2.0 * PI * 440.0 * i as f64 / 22050.0).sin() + 0.05 * gaussian(&mut r))
        .collect();
    let got = MfccExtractor::new(cfg).unwrap().extract(&x);
    let want = mfcc_oracle(&x, &cfg);
    for (g, w) in got.0.iter().zip(&want) {
        assert!((g - w).abs() < 1e-6, "{g} vs {w}");
    }
}

#[test]
fn dct_orthonormal_and_frame_examples() {
    let m = dct_matrix(64);
    for i in 0..64 {
        for j in 0..64 {
            let dot: f64 = (0..64).map(|k| m[i][k] * m[j][k]).sum();
            assert!((dot - f64::from(u8::from(i == j))).abs() < 1e-9);
        }
    }
    let cfg = MfccConfig::default();
    assert_eq!(frame_count(5 * 22050, &cfg), 212);
    let zero = MfccExtractor::new(cfg).unwrap().extract(&vec![0.0; 22050]);
    assert_eq!(zero.0.len(), 40);
    assert!((zero.0[0] - 8.0 * 1e-10f64.ln()).abs() < 1e-9);
}
