//! Expansion of each original breathing event into 102 variants: 15 pitch
//! shifts, 7 speed changes and 80 noise superpositions (10 noise clips at 8
//! signal-to-noise ratios).

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};
use crate::ingest::{self, SubjectId, ANALYSIS_RATE};
use crate::rng;
use crate::segment::{BreathingEvent, EventOrigin};

pub const VARIANTS_PER_EVENT: usize = 102;
pub const NOISE_CLIPS: usize = 10;

pub const SPEED_FACTORS: [f64; 7] = [0.25, 0.5, 0.75, 1.25, 1.5, 1.75, 2.0];
pub const SNR_LEVELS: [f64; 8] = [1e-4, 1e-3, 1e-2, 1e-1, 1e1, 1e2, 1e3, 1e4];

/// Semitone shifts -3.5, -3.0, ..., +3.5 (0.0 included, reproducing the
/// original clip).
pub fn pitch_steps() -> [f64; 15] {
    std::array::from_fn(|i| -3.5 + 0.5 * i as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AugmentationSpec {
    PitchShift { semitones: f64 },
    SpeedChange { factor: f64 },
    NoiseMix { noise_id: usize, snr: f64 },
}

impl fmt::Display for AugmentationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AugmentationSpec::PitchShift { semitones } => write!(f, "pitch{semitones:+}"),
            AugmentationSpec::SpeedChange { factor } => write!(f, "speed{factor}"),
            AugmentationSpec::NoiseMix { noise_id, snr } => write!(f, "noise{noise_id}_snr{snr:e}"),
        }
    }
}

/// The fixed list of 102 augmentations: pitch shifts ascending, then speed
/// factors ascending, then noise mixes ordered by noise clip and ascending
/// SNR within each clip.
pub fn enumerate_specs() -> Vec<AugmentationSpec> {
    let pitch = pitch_steps()
        .into_iter()
        .map(|semitones| AugmentationSpec::PitchShift { semitones });
    let speed = SPEED_FACTORS
        .into_iter()
        .map(|factor| AugmentationSpec::SpeedChange { factor });
    let noise = (0..NOISE_CLIPS).flat_map(|noise_id| {
        SNR_LEVELS
            .into_iter()
            .map(move |snr| AugmentationSpec::NoiseMix { noise_id, snr })
    });
    pitch.chain(speed).chain(noise).collect()
}

/// Ten background-noise recordings at the analysis rate.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBank {
    clips: Vec<Vec<f64>>,
}

impl NoiseBank {
    pub fn new(clips: Vec<Vec<f64>>) -> Result<Self> {
        if clips.len() != NOISE_CLIPS {
            return Err(Error::data(format!(
                "noise bank needs exactly {NOISE_CLIPS} clips, got {}",
                clips.len()
            )));
        }
        if let Some(i) = clips.iter().position(|c| dsp::mean_square(c) == 0.0) {
            return Err(Error::data(format!("noise clip {i} is silent")));
        }
        Ok(NoiseBank { clips })
    }

    /// Generated appliance-like noise: a motor hum with harmonics over
    /// low-passed broadband noise. Fixed content, independent of any seed.
    pub fn synthetic() -> Self {
        let rate = f64::from(ANALYSIS_RATE);
        let len = 3 * ANALYSIS_RATE as usize;
        let clips = (0..NOISE_CLIPS)
            .map(|k| {
                let mut r = rng::stream(0x5EED, "noise-bank", k as u64);
                let white: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut r)).collect();
                let cutoff = 150.0 + 90.0 * k as f64;
                let rumble = dsp::low_pass(&dsp::low_pass(&white, cutoff, rate), cutoff, rate);
                let hiss = dsp::low_pass(&white, 2500.0 + 300.0 * k as f64, rate);
                let f0 = 50.0 + 11.0 * k as f64;
                let rumble_level = dsp::rms(&rumble);
                let hiss_level = dsp::rms(&hiss);
                let mut pcm: Vec<f64> = (0..len)
                    .map(|i| {
                        let t = i as f64 / rate;
                        let hum: f64 = (1..=4)
                            .map(|h| (2.0 * PI * f0 * h as f64 * t).sin() / h as f64)
                            .sum();
                        rumble[i] / rumble_level + 0.05 * hiss[i] / hiss_level + 0.5 * hum
                    })
                    .collect();
                let peak = pcm.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                pcm.iter_mut().for_each(|v| *v *= 0.5 / peak);
                pcm
            })
            .collect();
        NoiseBank { clips }
    }

    /// Loads exactly ten WAV files from `dir`; lexicographic file-name order
    /// defines the noise id.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
            .collect();
        paths.sort();
        let noise_id = SubjectId::new("noise")?;
        let clips = paths
            .iter()
            .map(|p| ingest::load_audio(p, noise_id.clone()).map(|c| c.pcm))
            .collect::<Result<Vec<_>>>()?;
        NoiseBank::new(clips)
    }

    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, clip) in self.clips.iter().enumerate() {
            ingest::write_wav(dir.join(format!("noise_{i:02}.wav")), clip, ANALYSIS_RATE)?;
        }
        Ok(())
    }

    pub fn clip(&self, noise_id: usize) -> Option<&[f64]> {
        self.clips.get(noise_id).map(Vec::as_slice)
    }
}

/// The two components of a noise superposition before they are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMixParts {
    pub clean: Vec<f64>,
    pub noise: Vec<f64>,
    pub gain: f64,
}

impl NoiseMixParts {
    /// Signal-to-noise power ratio of the components as mixed.
    pub fn achieved_snr(&self) -> f64 {
        dsp::mean_square(&self.clean) / dsp::mean_square(&self.noise)
    }
}

/// Gain applied to the noise so that `P_signal / (g^2 P_noise) = snr`.
pub fn noise_gain(signal_power: f64, noise_power: f64, snr: f64) -> f64 {
    (signal_power / (snr * noise_power)).sqrt()
}

/// Loops or truncates `noise` to `len` samples.
fn fit_noise(noise: &[f64], len: usize) -> Vec<f64> {
    noise.iter().copied().cycle().take(len).collect()
}

pub fn noise_mix_parts(
    clean: &[f64],
    noise_id: usize,
    snr: f64,
    bank: &NoiseBank,
) -> Result<NoiseMixParts> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::arg(format!("snr must be positive, got {snr}")));
    }
    let source = bank
        .clip(noise_id)
        .ok_or_else(|| Error::arg(format!("noise id {noise_id} not in bank")))?;
    let p_signal = dsp::mean_square(clean);
    if p_signal == 0.0 {
        return Err(Error::data("cannot mix noise into a silent event"));
    }
    let segment = fit_noise(source, clean.len());
    let p_noise = dsp::mean_square(&segment);
    if p_noise == 0.0 {
        return Err(Error::data(format!("noise clip {noise_id} is silent over the mixed span")));
    }
    let gain = noise_gain(p_signal, p_noise, snr);
    Ok(NoiseMixParts {
        clean: clean.to_vec(),
        noise: segment.into_iter().map(|v| v * gain).collect(),
        gain,
    })
}

fn pitch_shift(pcm: &[f64], semitones: f64) -> Vec<f64> {
    let ratio = 2f64.powf(semitones / 12.0);
    let shorter = ((pcm.len() as f64 / ratio).round() as usize).max(1);
    let resampled = dsp::resample_by(pcm, ratio, shorter);
    dsp::time_stretch(&resampled, pcm.len())
}

fn speed_change(pcm: &[f64], factor: f64) -> Vec<f64> {
    let len = ((pcm.len() as f64 / factor).round() as usize).max(1);
    dsp::time_stretch(pcm, len)
}

fn peak_normalize(mut pcm: Vec<f64>) -> Vec<f64> {
    let peak = pcm.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 1.0 {
        pcm.iter_mut().for_each(|v| *v /= peak);
    }
    pcm
}

/// Produces one augmented variant of `event`.
pub fn apply(
    event: &BreathingEvent,
    spec: AugmentationSpec,
    bank: &NoiseBank,
) -> Result<BreathingEvent> {
    let pcm = match spec {
        AugmentationSpec::PitchShift { semitones } => pitch_shift(&event.pcm, semitones),
        AugmentationSpec::SpeedChange { factor } => {
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(Error::arg(format!("speed factor must be positive, got {factor}")));
            }
            speed_change(&event.pcm, factor)
        }
        AugmentationSpec::NoiseMix { noise_id, snr } => {
            let parts = noise_mix_parts(&event.pcm, noise_id, snr, bank)?;
            parts.clean.iter().zip(&parts.noise).map(|(s, n)| s + n).collect()
        }
    };
    Ok(BreathingEvent {
        subject: event.subject.clone(),
        pcm: peak_normalize(pcm),
        sample_rate: event.sample_rate,
        origin: EventOrigin::Augmented {
            parent: event.origin.root().clone(),
            spec,
        },
    })
}

/// Applies all 102 specs to every event. Output is grouped by parent event
/// in input order, specs in `enumerate_specs` order within each group.
pub fn augment_all(events: &[BreathingEvent], bank: &NoiseBank) -> Result<Vec<BreathingEvent>> {
    augment_with(events, &enumerate_specs(), bank)
}

/// Applies `specs` to every event, grouped by parent event.
pub fn augment_with(
    events: &[BreathingEvent],
    specs: &[AugmentationSpec],
    bank: &NoiseBank,
) -> Result<Vec<BreathingEvent>> {
    if events.is_empty() {
        return Err(Error::arg("no events to augment"));
    }
    if specs.is_empty() {
        return Err(Error::arg("no augmentation specs"));
    }
    let groups = events
        .par_iter()
        .map(|e| specs.iter().map(|&s| apply(e, s, bank)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(groups.into_iter().flatten().collect())
}
