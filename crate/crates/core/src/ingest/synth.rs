//! Seeded synthetic recordings.
//!
//! Each subject gets its own parameter draw; `separation` scales how far the
//! parameters move away from the shared population centre, so
//! `separation = 0` yields identically distributed subjects.
//!
//! * heart rate: subject baseline plus AR(1) noise, one sample per minute
//! * gait: per-axis sinusoids at a subject cadence with a second harmonic,
//!   Gaussian noise, and occasional still bouts; one sample per 50 ms
//! * breathing: six amplitude-modulated bursts of band-passed noise with
//!   subject-specific resonances, separated by silence

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{
    AudioClip, GaitSample, GaitSeries, HeartRateSample, HeartRateSeries, SubjectId, ANALYSIS_RATE,
};
use crate::dsp::{self, BandPass};
use crate::error::{Error, Result};
use crate::rng;

/// Stream lengths that produce 800 heart-rate and 720 gait windows of 10
/// samples at a step of 5.
pub const HR_SAMPLES: usize = 4005;
pub const GAIT_SAMPLES: usize = 3605;
pub const HR_PERIOD_S: f64 = 60.0;
pub const GAIT_PERIOD_S: f64 = 0.05;
pub const EVENTS_PER_CLIP: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecording {
    pub heart_rate: HeartRateSeries,
    pub gait: GaitSeries,
    pub breathing: AudioClip,
}

impl SubjectRecording {
    pub fn subject(&self) -> &SubjectId {
        &self.heart_rate.subject
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub seed: u64,
    pub separation: f64,
    pub subjects: Vec<SubjectRecording>,
}

/// Subject-level parameters, each a standard normal draw that gets scaled by
/// the separation.
struct Traits {
    hr_level: f64,
    hr_spread: f64,
    cadence: f64,
    harmonic: f64,
    axis_gain: [f64; 6],
    axis_phase: [f64; 6],
    band: f64,
    band_ratio: f64,
    band_mix: f64,
}

impl Traits {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let mut z = || -> f64 { StandardNormal.sample(&mut *rng) };
        Traits {
            hr_level: z(),
            hr_spread: z(),
            cadence: z(),
            harmonic: z(),
            axis_gain: [z(), z(), z(), z(), z(), z()],
            axis_phase: [z(), z(), z(), z(), z(), z()],
            band: z(),
            band_ratio: z(),
            band_mix: z(),
        }
    }
}

pub fn synth_dataset(seed: u64, subjects: usize, separation: f64) -> Result<SyntheticDataset> {
    if subjects < 2 {
        return Err(Error::arg(format!("need at least 2 subjects, got {subjects}")));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::arg(format!("separation must be >= 0, got {separation}")));
    }
    let width = subjects.to_string().len().max(2);
    let recordings = (0..subjects)
        .map(|i| {
            let id = SubjectId::new(format!("s{:0width$}", i + 1))?;
            let mut trait_rng = rng::stream(seed, "traits", i as u64);
            let traits = Traits::draw(&mut trait_rng);
            Ok(SubjectRecording {
                heart_rate: heart_rate(&id, &traits, separation, &mut rng::stream(seed, "hr", i as u64)),
                gait: gait(&id, &traits, separation, &mut rng::stream(seed, "gait", i as u64)),
                breathing: breathing(&id, &traits, separation, &mut rng::stream(seed, "breath", i as u64)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticDataset {
        seed,
        separation,
        subjects: recordings,
    })
}

fn heart_rate(id: &SubjectId, t: &Traits, sep: f64, rng: &mut ChaCha8Rng) -> HeartRateSeries {
    const PHI: f64 = 0.8;
    let baseline = 74.0 + sep * 2.5 * t.hr_level;
    let spread = 5.0 * (0.15 * sep * t.hr_spread).exp();
    let innovation = Normal::new(0.0, spread * (1.0 - PHI * PHI).sqrt()).unwrap();
    let z: f64 = StandardNormal.sample(rng);
    let mut e = spread * z;
    let samples = (0..HR_SAMPLES)
        .map(|i| {
            e = PHI * e + innovation.sample(rng);
            HeartRateSample {
                timestamp: i as f64 * HR_PERIOD_S,
                bpm: (baseline + e).clamp(30.0, 220.0),
            }
        })
        .collect();
    HeartRateSeries {
        subject: id.clone(),
        samples,
    }
}

fn gait(id: &SubjectId, t: &Traits, sep: f64, rng: &mut ChaCha8Rng) -> GaitSeries {
    const BASE_GAIN: [f64; 6] = [1.6, 2.4, 3.0, 0.6, 0.4, 0.5];
    const NOISE: [f64; 6] = [0.25, 0.25, 0.25, 0.05, 0.05, 0.05];
    const STILL_NOISE: [f64; 6] = [0.04, 0.04, 0.04, 0.01, 0.01, 0.01];
    const BLOCK: usize = 240;

    let cadence = 1.9 * (0.06 * sep * t.cadence).exp();
    let harmonic = 0.3 * (0.2 * sep * t.harmonic).exp();
    let gain: Vec<f64> = (0..6)
        .map(|a| BASE_GAIN[a] * (0.15 * sep * t.axis_gain[a]).exp())
        .collect();
    let phase: Vec<f64> = (0..6).map(|a| 0.3 * sep * t.axis_phase[a]).collect();

    let mut moving = true;
    let samples = (0..GAIT_SAMPLES)
        .map(|i| {
            if i % BLOCK == 0 {
                moving = rng.random::<f64>() >= 0.2;
            }
            let time = i as f64 * GAIT_PERIOD_S;
            let mut axes = [0.0; 6];
            for a in 0..6 {
                let z: f64 = StandardNormal.sample(rng);
                let theta = 2.0 * PI * cadence * time + phase[a];
                let motion = if moving {
                    gain[a] * (theta.sin() + harmonic * (2.0 * theta).sin())
                } else {
                    0.0
                };
                let noise = if moving { NOISE[a] } else { STILL_NOISE[a] };
                axes[a] = motion + noise * z;
            }
            axes[2] += 9.81;
            GaitSample {
                timestamp: time,
                axes,
            }
        })
        .collect();
    GaitSeries {
        subject: id.clone(),
        samples,
    }
}

fn breathing(id: &SubjectId, t: &Traits, sep: f64, rng: &mut ChaCha8Rng) -> AudioClip {
    let rate = f64::from(ANALYSIS_RATE);
    let centre = (1200.0 * (0.25 * sep * t.band).exp()).clamp(250.0, 6000.0);
    let upper = (centre * 2.2 * (0.1 * sep * t.band_ratio).exp()).min(9500.0);
    let mix = 0.5 * (0.3 * sep * t.band_mix).exp();
    let low = BandPass::new(centre, 3.0, rate);
    let high = BandPass::new(upper, 3.0, rate);

    let silence = |secs: f64| vec![0.0; (secs * rate).round() as usize];
    let mut pcm = silence(0.3);
    for _ in 0..EVENTS_PER_CLIP {
        let len = (rng.random_range(1.0..1.3) * rate).round() as usize;
        let white: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
        let a = low.apply(&low.apply(&white));
        let b = high.apply(&high.apply(&white));
        let mut burst: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + mix * y).collect();
        let level = dsp::rms(&burst).max(1e-12);
        for (i, v) in burst.iter_mut().enumerate() {
            let env = (PI * i as f64 / len as f64).sin();
            *v = (0.15 * *v / level * env).clamp(-1.0, 1.0);
        }
        pcm.extend(burst);
        pcm.extend(silence(rng.random_range(0.5..0.8)));
    }
    AudioClip {
        subject: id.clone(),
        pcm,
        sample_rate: ANALYSIS_RATE,
    }
}
