//! Loading recordings of each biometric stream, plus a seeded synthetic
//! generator for desk-scale experiments.
//!
//! File formats:
//!
//! * heart rate: CSV with header `timestamp,bpm`
//! * gait: CSV with header `timestamp,ax,ay,az,gx,gy,gz`
//! * audio: RIFF WAV, 16-bit PCM, mono or stereo
//!
//! Gait values are taken as raw reals. No unit or device-orientation
//! convention is assumed beyond "accelerometer in m/s², gyroscope in rad/s"
//! for the movement detector's default threshold.

mod csv_io;
mod synth;
mod wav;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_io::{load_gait, load_heart_rate, write_gait, write_heart_rate};
pub use synth::{synth_dataset, SubjectRecording, SyntheticDataset};
pub use wav::{load_audio, load_audio_at, write_wav};

/// Sample rate every clip is resampled to on load.
pub const ANALYSIS_RATE: u32 = 22_050;

/// Lower and upper (exclusive) plausibility bounds on heart rate, beats/min.
pub const BPM_RANGE: (f64, f64) = (20.0, 250.0);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubjectId(String);

impl SubjectId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(Error::data("subject id must be non-empty"));
        }
        Ok(SubjectId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SubjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeartRateSample {
    pub timestamp: f64,
    pub bpm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeartRateSeries {
    pub subject: SubjectId,
    pub samples: Vec<HeartRateSample>,
}

impl HeartRateSeries {
    /// Builds a series, enforcing strictly increasing timestamps and the
    /// plausible bpm range.
    pub fn new(subject: SubjectId, samples: Vec<HeartRateSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            check_bpm(s.bpm).map_err(|m| Error::data(format!("sample {i}: {m}")))?;
            if i > 0 && s.timestamp <= samples[i - 1].timestamp {
                return Err(Error::data(format!(
                    "sample {i}: timestamp {} is not after {}",
                    s.timestamp,
                    samples[i - 1].timestamp
                )));
            }
        }
        Ok(HeartRateSeries { subject, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn bpm(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.bpm).collect()
    }
}

pub(crate) fn check_bpm(bpm: f64) -> std::result::Result<(), String> {
    if bpm.is_finite() && bpm > BPM_RANGE.0 && bpm < BPM_RANGE.1 {
        Ok(())
    } else {
        Err(format!(
            "bpm {bpm} outside ({}, {})",
            BPM_RANGE.0, BPM_RANGE.1
        ))
    }
}

/// One inertial sample: accelerometer then gyroscope, x/y/z each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitSample {
    pub timestamp: f64,
    pub axes: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitSeries {
    pub subject: SubjectId,
    pub samples: Vec<GaitSample>,
}

impl GaitSeries {
    pub fn new(subject: SubjectId, samples: Vec<GaitSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if s.axes.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(format!("sample {i}: non-finite axis value")));
            }
            if i > 0 && s.timestamp <= samples[i - 1].timestamp {
                return Err(Error::data(format!(
                    "sample {i}: timestamp {} is not after {}",
                    s.timestamp,
                    samples[i - 1].timestamp
                )));
            }
        }
        Ok(GaitSeries { subject, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Mono PCM audio scaled to [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioClip {
    pub subject: SubjectId,
    pub pcm: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioClip {
    pub fn new(subject: SubjectId, pcm: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::data("sample rate must be positive"));
        }
        if pcm.is_empty() {
            return Err(Error::data("audio clip has zero length"));
        }
        Ok(AudioClip {
            subject,
            pcm,
            sample_rate,
        })
    }

    pub fn duration(&self) -> f64 {
        self.pcm.len() as f64 / f64::from(self.sample_rate)
    }
}
