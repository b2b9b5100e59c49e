//! Fixed-length windowing of sensor streams and endpoint detection of single
//! inhalation events in breathing clips.

use serde::{Deserialize, Serialize};

use crate::augment::AugmentationSpec;
use crate::dsp;
use crate::error::{Error, Result};
use crate::ingest::{AudioClip, GaitSeries, HeartRateSeries, SubjectId};

pub const DEFAULT_WINDOW_LEN: usize = 10;
pub const DEFAULT_STEP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WindowKind {
    HeartRate,
    Gait,
}

impl WindowKind {
    pub fn channel_count(self) -> usize {
        match self {
            WindowKind::HeartRate => 1,
            WindowKind::Gait => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleWindow {
    pub subject: SubjectId,
    pub kind: WindowKind,
    /// One row per channel, each `window_len` long.
    pub channels: Vec<Vec<f64>>,
    pub index: usize,
    /// Offset of the first sample in the source stream.
    pub offset: usize,
    /// Timestamp of the first sample.
    pub timestamp: f64,
}

impl SampleWindow {
    pub fn window_len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    /// Checks channel count, equal channel lengths and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.channels.len() != self.kind.channel_count() {
            return Err(Error::data(format!(
                "{:?} window needs {} channels, has {}",
                self.kind,
                self.kind.channel_count(),
                self.channels.len()
            )));
        }
        let len = self.window_len();
        if len < 2 || self.channels.iter().any(|c| c.len() != len) {
            return Err(Error::data("window channels must share a length of at least 2"));
        }
        if self.channels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::data("window contains non-finite values"));
        }
        Ok(())
    }
}

/// A multi-channel stream that can be cut into windows.
pub trait Windowable {
    fn kind(&self) -> WindowKind;
    fn subject(&self) -> &SubjectId;
    fn len(&self) -> usize;
    fn timestamp(&self, i: usize) -> f64;
    fn value(&self, i: usize, channel: usize) -> f64;
}

impl Windowable for HeartRateSeries {
    fn kind(&self) -> WindowKind {
        WindowKind::HeartRate
    }
    fn subject(&self) -> &SubjectId {
        &self.subject
    }
    fn len(&self) -> usize {
        self.samples.len()
    }
    fn timestamp(&self, i: usize) -> f64 {
        self.samples[i].timestamp
    }
    fn value(&self, i: usize, _channel: usize) -> f64 {
        self.samples[i].bpm
    }
}

impl Windowable for GaitSeries {
    fn kind(&self) -> WindowKind {
        WindowKind::Gait
    }
    fn subject(&self) -> &SubjectId {
        &self.subject
    }
    fn len(&self) -> usize {
        self.samples.len()
    }
    fn timestamp(&self, i: usize) -> f64 {
        self.samples[i].timestamp
    }
    fn value(&self, i: usize, channel: usize) -> f64 {
        self.samples[i].axes[channel]
    }
}

/// Number of windows `windowize` produces for a stream of `n` samples.
pub fn window_count(n: usize, window_len: usize, step: usize) -> usize {
    if n < window_len || step == 0 {
        0
    } else {
        (n - window_len) / step + 1
    }
}

/// Cuts a stream into windows of `window_len` samples every `step` samples.
/// All channels share the same boundaries; a trailing partial window is
/// dropped.
pub fn windowize<S: Windowable + ?Sized>(
    series: &S,
    window_len: usize,
    step: usize,
) -> Result<Vec<SampleWindow>> {
    if step == 0 {
        return Err(Error::arg("window step must be at least 1"));
    }
    if window_len < 2 {
        return Err(Error::arg("window length must be at least 2"));
    }
    let n = series.len();
    if n < window_len {
        return Err(Error::data(format!(
            "series of {n} samples is shorter than one window of {window_len}"
        )));
    }
    let kind = series.kind();
    Ok((0..window_count(n, window_len, step))
        .map(|index| {
            let offset = index * step;
            let channels = (0..kind.channel_count())
                .map(|c| (offset..offset + window_len).map(|i| series.value(i, c)).collect())
                .collect();
            SampleWindow {
                subject: series.subject().clone(),
                kind,
                channels,
                index,
                offset,
                timestamp: series.timestamp(offset),
            }
        })
        .collect())
}

/// Identifies an original event: the clip it came from and its ordinal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventRef {
    pub clip: String,
    pub ordinal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventOrigin {
    Original(EventRef),
    Augmented {
        parent: EventRef,
        spec: AugmentationSpec,
    },
}

impl EventOrigin {
    /// The original event this one descends from (itself if original).
    pub fn root(&self) -> &EventRef {
        match self {
            EventOrigin::Original(r) => r,
            EventOrigin::Augmented { parent, .. } => parent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreathingEvent {
    pub subject: SubjectId,
    pub pcm: Vec<f64>,
    pub sample_rate: u32,
    pub origin: EventOrigin,
}

impl BreathingEvent {
    pub fn duration(&self) -> f64 {
        self.pcm.len() as f64 / f64::from(self.sample_rate)
    }

    /// Fold group: the ordinal of the original event.
    pub fn group(&self) -> usize {
        self.origin.root().ordinal
    }
}

/// Energy-based endpoint detector settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventDetector {
    pub frame_s: f64,
    pub hop_s: f64,
    pub min_event_s: f64,
    pub min_gap_s: f64,
    /// Absolute lower bound on the silence threshold.
    pub floor: f64,
    /// Silence threshold as a fraction of whole-clip RMS.
    pub relative: f64,
}

impl Default for EventDetector {
    fn default() -> Self {
        EventDetector {
            frame_s: 0.025,
            hop_s: 0.010,
            min_event_s: 0.2,
            min_gap_s: 0.15,
            floor: 1e-4,
            relative: 0.1,
        }
    }
}

impl EventDetector {
    /// Sample spans `[start, end)` of detected events, in time order.
    pub fn spans(&self, pcm: &[f64], sample_rate: u32) -> Vec<(usize, usize)> {
        let rate = f64::from(sample_rate);
        let n = pcm.len();
        let frame = ((self.frame_s * rate).round() as usize).clamp(1, n.max(1));
        let hop = ((self.hop_s * rate).round() as usize).max(1);
        let min_event = (self.min_event_s * rate).round() as usize;
        let min_gap = (self.min_gap_s * rate).round() as isize;
        let threshold = self.floor.max(self.relative * dsp::rms(pcm));
        if n == 0 {
            return Vec::new();
        }

        // Runs of consecutive loud frames, as sample spans.
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut current: Option<(usize, usize)> = None;
        let mut start = 0;
        loop {
            let end = (start + frame).min(n);
            let loud = dsp::rms(&pcm[start..end]) > threshold;
            current = match (current, loud) {
                (None, true) => Some((start, end)),
                (Some((s, _)), true) => Some((s, end)),
                (Some(run), false) => {
                    runs.push(run);
                    None
                }
                (None, false) => None,
            };
            if start + frame >= n {
                break;
            }
            start += hop;
        }
        runs.extend(current);

        let mut merged: Vec<(usize, usize)> = Vec::new();
        for run in runs {
            match merged.last_mut() {
                Some(last) if (run.0 as isize - last.1 as isize) < min_gap => last.1 = run.1,
                _ => merged.push(run),
            }
        }
        merged.retain(|(s, e)| e - s >= min_event);
        merged
    }
}

/// Splits a clip into single inhalation events with the default detector.
pub fn extract_events(clip: &AudioClip) -> Vec<BreathingEvent> {
    extract_events_with(clip, &EventDetector::default())
}

pub fn extract_events_with(clip: &AudioClip, detector: &EventDetector) -> Vec<BreathingEvent> {
    detector
        .spans(&clip.pcm, clip.sample_rate)
        .into_iter()
        .enumerate()
        .map(|(ordinal, (s, e))| BreathingEvent {
            subject: clip.subject.clone(),
            pcm: clip.pcm[s..e].to_vec(),
            sample_rate: clip.sample_rate,
            origin: EventOrigin::Original(EventRef {
                clip: clip.subject.to_string(),
                ordinal,
            }),
        })
        .collect()
}
