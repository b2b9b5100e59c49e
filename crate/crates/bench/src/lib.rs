//! Deterministic inputs for the criterion benchmarks in `benches/`.

use wearauth_core::segment::{BreathingEvent, EventOrigin, EventRef};
use wearauth_core::SubjectId;

/// Uniform values in [-1, 1) from a xorshift stream.
pub fn noise(seed: u64, n: usize) -> Vec<f64> {
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..n)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            2.0 * ((x >> 11) as f64 / (1u64 << 53) as f64) - 1.0
        })
        .collect()
}

/// A 1.4 s breathing-like burst at 22050 Hz.
pub fn event() -> BreathingEvent {
    let subject = SubjectId::new("bench").unwrap();
    let pcm = noise(7, 30_870).into_iter().map(|v| 0.2 * v).collect();
    BreathingEvent {
        subject,
        pcm,
        sample_rate: 22_050,
        origin: EventOrigin::Original(EventRef {
            clip: "bench".into(),
            ordinal: 0,
        }),
    }
}

/// Two Gaussian-ish blobs in `dim` dimensions, `n` rows each, labelled ±1.
pub fn blobs(n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rows = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for (class, shift) in [(1.0, 0.75), (-1.0, -0.75)] {
        let seed = if class > 0.0 { 1 } else { 2 };
        let v = noise(seed, n * dim * 3);
        for i in 0..n {
            let row = (0..dim)
                .map(|d| {
                    let k = 3 * (i * dim + d);
                    shift + v[k] + v[k + 1] + v[k + 2]
                })
                .collect();
            rows.push(row);
            labels.push(class);
        }
    }
    (rows, labels)
}
