//! Mel-frequency cepstral coefficients, averaged over frames to one vector
//! per breathing event.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};
use crate::segment::BreathingEvent;

pub const MFCC_COUNT: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfccConfig {
    pub sample_rate: u32,
    pub frame_len: usize,
    pub hop: usize,
    pub mel_filters: usize,
    pub coefficients: usize,
    pub pre_emphasis: f64,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            sample_rate: 22_050,
            frame_len: 2048,
            hop: 512,
            mel_filters: 64,
            coefficients: MFCC_COUNT,
            pre_emphasis: 0.97,
            log_floor: 1e-10,
        }
    }
}

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters with unit peak, centres equally spaced on the mel
/// scale between 0 Hz and Nyquist. One row per filter, one column per
/// FFT bin `0..=frame_len/2`.
pub fn mel_filterbank(cfg: &MfccConfig) -> Vec<Vec<f64>> {
    let bins = cfg.frame_len / 2 + 1;
    let nyquist = f64::from(cfg.sample_rate) / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..cfg.mel_filters + 2)
        .map(|i| mel_to_hz(top * i as f64 / (cfg.mel_filters + 1) as f64))
        .collect();
    let bin_hz = f64::from(cfg.sample_rate) / cfg.frame_len as f64;
    (0..cfg.mel_filters)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..bins)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= mid {
                        (f - lo) / (mid - lo)
                    } else {
                        (hi - f) / (hi - mid)
                    }
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II matrix, `n × n`.
pub fn dct_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            (0..n)
                .map(|i| scale * (PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64).cos())
                .collect()
        })
        .collect()
}

/// Frames analysed for a signal of `len` samples; signals shorter than one
/// frame are zero-padded to a single frame.
pub fn frame_count(len: usize, cfg: &MfccConfig) -> usize {
    if len <= cfg.frame_len {
        1
    } else {
        (len - cfg.frame_len) / cfg.hop + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfccVector(pub Vec<f64>);

impl MfccVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Reusable extractor; the FFT plan, window, filterbank and DCT are built
/// once. Shareable across threads.
pub struct MfccExtractor {
    cfg: MfccConfig,
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    /// Non-zero bin range and weights of each filter.
    filters: Vec<(usize, Vec<f64>)>,
    dct: Vec<Vec<f64>>,
}

impl std::fmt::Debug for MfccExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MfccExtractor").field("cfg", &self.cfg).finish()
    }
}

impl MfccExtractor {
    pub fn new(cfg: MfccConfig) -> Result<Self> {
        if cfg.coefficients > cfg.mel_filters {
            return Err(Error::arg("cannot keep more coefficients than mel filters"));
        }
        if cfg.frame_len < 2 || cfg.hop == 0 || cfg.mel_filters == 0 {
            return Err(Error::arg("invalid MFCC framing"));
        }
        let fft = FftPlanner::new().plan_fft_forward(cfg.frame_len);
        let mut dct = dct_matrix(cfg.mel_filters);
        dct.truncate(cfg.coefficients);
        Ok(MfccExtractor {
            fft,
            window: dsp::hann(cfg.frame_len),
            filters: mel_filterbank(&cfg)
                .into_iter()
                .map(|f| {
                    let lo = f.iter().position(|&w| w != 0.0).unwrap_or(0);
                    let hi = f.iter().rposition(|&w| w != 0.0).map_or(lo, |h| h + 1);
                    (lo, f[lo..hi].to_vec())
                })
                .collect(),
            dct,
            cfg,
        })
    }

    pub fn config(&self) -> &MfccConfig {
        &self.cfg
    }

    /// Log mel energies of every frame.
    pub fn log_mel_frames(&self, pcm: &[f64]) -> Vec<Vec<f64>> {
        let cfg = &self.cfg;
        let mut emphasized: Vec<f64> = Vec::with_capacity(pcm.len().max(cfg.frame_len));
        for (i, &v) in pcm.iter().enumerate() {
            let prev = if i == 0 { 0.0 } else { pcm[i - 1] };
            emphasized.push(v - cfg.pre_emphasis * prev);
        }
        if emphasized.len() < cfg.frame_len {
            emphasized.resize(cfg.frame_len, 0.0);
        }
        let bins = cfg.frame_len / 2 + 1;
        let mut buf = vec![Complex::new(0.0, 0.0); cfg.frame_len];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        (0..frame_count(emphasized.len(), cfg))
            .map(|f| {
                let start = f * cfg.hop;
                for (i, c) in buf.iter_mut().enumerate() {
                    *c = Complex::new(emphasized[start + i] * self.window[i], 0.0);
                }
                self.fft.process_with_scratch(&mut buf, &mut scratch);
                let power: Vec<f64> = buf[..bins].iter().map(|c| c.norm_sqr()).collect();
                self.filters
                    .iter()
                    .map(|(lo, w)| {
                        let e: f64 = w.iter().zip(&power[*lo..]).map(|(w, p)| w * p).sum();
                        e.max(cfg.log_floor).ln()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn extract(&self, pcm: &[f64]) -> MfccVector {
        let frames = self.log_mel_frames(pcm);
        let mut mean = vec![0.0; self.cfg.coefficients];
        for logmel in &frames {
            for (k, row) in self.dct.iter().enumerate() {
                mean[k] += row.iter().zip(logmel).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        let n = frames.len() as f64;
        mean.iter_mut().for_each(|v| *v /= n);
        MfccVector(mean)
    }

    pub fn event(&self, event: &BreathingEvent) -> Result<MfccVector> {
        if event.sample_rate != self.cfg.sample_rate {
            return Err(Error::data(format!(
                "event at {} Hz, extractor expects {} Hz",
                event.sample_rate, self.cfg.sample_rate
            )));
        }
        Ok(self.extract(&event.pcm))
    }
}

/// MFCCs of one event with the default configuration.
pub fn mfcc(event: &BreathingEvent) -> Result<MfccVector> {
    static DEFAULT: OnceLock<MfccExtractor> = OnceLock::new();
    DEFAULT
        .get_or_init(|| MfccExtractor::new(MfccConfig::default()).expect("default MFCC config is valid"))
        .event(event)
}
