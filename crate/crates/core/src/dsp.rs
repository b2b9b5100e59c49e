//! Signal-processing primitives shared by loading, augmentation and the
//! synthetic generator.

use std::f64::consts::PI;

/// Zero crossings of the sinc kernel on each side of the centre tap.
const SINC_HALF_ZEROS: f64 = 16.0;

/// Frame length and synthesis hop of the overlap-add time stretcher.
pub const OLA_FRAME: usize = 1024;
pub const OLA_HOP: usize = 256;

pub fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

pub fn rms(x: &[f64]) -> f64 {
    mean_square(x).sqrt()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Blackman window evaluated at `u` in [-1, 1], zero outside.
fn blackman(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let t = (u + 1.0) / 2.0;
    0.42 - 0.5 * (2.0 * PI * t).cos() + 0.08 * (4.0 * PI * t).cos()
}

/// Kernel table entries per input sample.
const KERNEL_RES: f64 = 512.0;

/// Windowed-sinc interpolation reading the input at positions
/// `0, step, 2*step, ...` and producing `out_len` samples.
///
/// When `step > 1` the kernel is widened so its cutoff sits at the output
/// Nyquist frequency.
pub fn resample_by(x: &[f64], step: f64, out_len: usize) -> Vec<f64> {
    assert!(step > 0.0 && step.is_finite(), "resample step must be positive");
    if x.is_empty() || out_len == 0 {
        return vec![0.0; out_len];
    }
    if step == 1.0 {
        let mut y = x.to_vec();
        y.resize(out_len, 0.0);
        return y;
    }
    let cutoff = (1.0 / step).min(1.0);
    let half_width = SINC_HALF_ZEROS / cutoff;
    // kernel tabulated on a fine grid, linearly interpolated
    let table: Vec<f64> = (0..=(half_width * KERNEL_RES).ceil() as usize + 1)
        .map(|i| {
            let d = i as f64 / KERNEL_RES;
            if d > half_width {
                0.0
            } else {
                cutoff * sinc(cutoff * d) * blackman(d / half_width)
            }
        })
        .collect();
    let kernel = |d: f64| {
        let p = d.abs() * KERNEL_RES;
        let i = p as usize;
        let f = p - i as f64;
        table[i] + f * (table[i + 1] - table[i])
    };
    let n = x.len() as isize;
    (0..out_len)
        .map(|j| {
            let t = j as f64 * step;
            let lo = (t - half_width).ceil() as isize;
            let hi = (t + half_width).floor() as isize;
            let mut acc = 0.0;
            for k in lo.max(0)..=hi.min(n - 1) {
                acc += x[k as usize] * kernel(t - k as f64);
            }
            acc
        })
        .collect()
}

/// Converts between sample rates. The output length is the input duration
/// expressed at `to_rate`, rounded to the nearest sample.
pub fn resample(x: &[f64], from_rate: u32, to_rate: u32) -> Vec<f64> {
    if from_rate == to_rate {
        return x.to_vec();
    }
    let step = f64::from(from_rate) / f64::from(to_rate);
    let out_len = (x.len() as f64 / step).round() as usize;
    resample_by(x, step, out_len)
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Overlap-add time stretch to exactly `out_len` samples, keeping pitch.
///
/// Frames are centred (the input is padded by half a frame on each side)
/// and the output is normalised by the accumulated window weight, so a
/// stretch to the input's own length reproduces the input.
pub fn time_stretch(x: &[f64], out_len: usize) -> Vec<f64> {
    if x.is_empty() || out_len == 0 {
        return vec![0.0; out_len];
    }
    let rate = x.len() as f64 / out_len as f64;
    let half = OLA_FRAME / 2;
    let window = hann(OLA_FRAME);

    let mut padded = vec![0.0; x.len() + OLA_FRAME];
    padded[half..half + x.len()].copy_from_slice(x);

    let total = out_len + OLA_FRAME;
    let mut acc = vec![0.0; total];
    let mut weight = vec![0.0; total];
    let frames = out_len / OLA_HOP + 2;
    for k in 0..frames {
        let syn = k * OLA_HOP;
        let ana = (syn as f64 * rate).round() as usize;
        for i in 0..OLA_FRAME {
            let (o, a) = (syn + i, ana + i);
            if o >= total {
                break;
            }
            let v = padded.get(a).copied().unwrap_or(0.0);
            acc[o] += v * window[i];
            weight[o] += window[i];
        }
    }
    (0..out_len)
        .map(|i| {
            let w = weight[i + half];
            if w > 1e-9 {
                acc[i + half] / w
            } else {
                0.0
            }
        })
        .collect()
}

/// Second-order band-pass section (constant 0 dB peak gain).
#[derive(Debug, Clone, Copy)]
pub struct BandPass {
    b0: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl BandPass {
    pub fn new(center_hz: f64, q: f64, sample_rate: f64) -> Self {
        let w0 = 2.0 * PI * center_hz / sample_rate;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        BandPass {
            b0: alpha / a0,
            b2: -alpha / a0,
            a1: -2.0 * w0.cos() / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        x.iter()
            .map(|&v| {
                let y = self.b0 * v + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
                x2 = x1;
                x1 = v;
                y2 = y1;
                y1 = y;
                y
            })
            .collect()
    }
}

/// One-pole low-pass filter.
pub fn low_pass(x: &[f64], cutoff_hz: f64, sample_rate: f64) -> Vec<f64> {
    let a = (-2.0 * PI * cutoff_hz / sample_rate).exp();
    let mut state = 0.0;
    x.iter()
        .map(|&v| {
            state = (1.0 - a) * v + a * state;
            state
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, rate: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / rate).sin()).collect()
    }

    #[test]
    fn unit_stretch_is_identity() {
        let x: Vec<f64> = sine(440.0, 22050.0, 5000)
            .iter()
            .enumerate()
            .map(|(i, v)| v * (1.0 + (i % 7) as f64 * 0.01))
            .collect();
        let y = time_stretch(&x, x.len());
        let err = rms(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(err < 1e-12, "rms error {err}");
    }

    #[test]
    fn stretch_hits_requested_length() {
        let x = sine(300.0, 22050.0, 22050);
        for len in [5512, 11025, 44100, 88200] {
            assert_eq!(time_stretch(&x, len).len(), len);
        }
    }

    #[test]
    fn stretch_keeps_frequency() {
        // Zero crossings per second of a stretched sine stay put.
        let x = sine(500.0, 22050.0, 22050);
        let y = time_stretch(&x, 44100);
        let crossings = y[2000..42000]
            .windows(2)
            .filter(|w| w[0] < 0.0 && w[1] >= 0.0)
            .count() as f64;
        let freq = crossings / (40000.0 / 22050.0);
        assert!((freq - 500.0).abs() < 15.0, "{freq}");
    }

    #[test]
    fn resample_preserves_low_frequency_sine() {
        let x = sine(200.0, 44100.0, 44100);
        let y = resample(&x, 44100, 22050);
        assert_eq!(y.len(), 22050);
        let reference = sine(200.0, 22050.0, 22050);
        let err: f64 = y[200..21800]
            .iter()
            .zip(&reference[200..21800])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "max error {err}");
    }

    #[test]
    fn resample_same_rate_is_copy() {
        let x = vec![0.1, -0.2, 0.3];
        assert_eq!(resample(&x, 22050, 22050), x);
    }

    #[test]
    fn band_pass_favours_centre() {
        let bp = BandPass::new(1000.0, 2.0, 22050.0);
        let centre = rms(&bp.apply(&sine(1000.0, 22050.0, 22050))[2000..]);
        let off = rms(&bp.apply(&sine(5000.0, 22050.0, 22050))[2000..]);
        assert!(centre > 0.65 && off < 0.2 * centre, "{centre} {off}");
    }
}
