use std::path::Path;

use super::{AudioClip, SubjectId, ANALYSIS_RATE};
use crate::dsp;
use crate::error::{Error, Result};

/// Loads a 16-bit PCM WAV, averages stereo to mono, scales by 1/32768 and
/// resamples to the analysis rate.
pub fn load_audio(path: impl AsRef<Path>, subject: SubjectId) -> Result<AudioClip> {
    load_audio_at(path, subject, ANALYSIS_RATE)
}

pub fn load_audio_at(path: impl AsRef<Path>, subject: SubjectId, rate: u32) -> Result<AudioClip> {
    let path = path.as_ref();
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedAudio(format!(
            "{}: expected 16-bit PCM, found {:?} {}-bit",
            path.display(),
            spec.sample_format,
            spec.bits_per_sample
        )));
    }
    let channels = usize::from(spec.channels);
    if !(1..=2).contains(&channels) {
        return Err(Error::UnsupportedAudio(format!(
            "{}: {} channels (mono or stereo only)",
            path.display(),
            channels
        )));
    }
    let raw = reader
        .into_samples::<i16>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(wav_err)?;
    if raw.is_empty() {
        return Err(Error::data(format!("{}: zero-length audio", path.display())));
    }
    let mono: Vec<f64> = raw
        .chunks(channels)
        .map(|frame| {
            frame.iter().map(|&s| f64::from(s) / 32768.0).sum::<f64>() / channels as f64
        })
        .collect();
    let pcm = dsp::resample(&mono, spec.sample_rate, rate);
    AudioClip::new(subject, pcm, rate)
}

/// Writes mono 16-bit PCM. Samples are clamped to the representable range.
pub fn write_wav(path: impl AsRef<Path>, pcm: &[f64], sample_rate: u32) -> Result<()> {
    let path = path.as_ref();
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for &v in pcm {
        let s = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(s).map_err(wav_err)?;
    }
    writer.finalize().map_err(wav_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sid() -> SubjectId {
        SubjectId::new("s01").unwrap()
    }

    fn write_raw(path: &Path, channels: u16, rate: u32, samples: &[i16]) {
        let spec = hound::WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(path, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
    }

    #[test]
    fn one_second_mono() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        write_raw(&p, 1, 22050, &vec![1000; 22050]);
        let clip = load_audio(&p, sid()).unwrap();
        assert_eq!(clip.pcm.len(), 22050);
        assert_eq!(clip.pcm[0], 1000.0 / 32768.0);
    }

    #[test]
    fn stereo_opposite_channels_average_to_silence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        let frames: Vec<i16> = (0..2000).flat_map(|_| [16384i16, -16384]).collect();
        write_raw(&p, 2, 22050, &frames);
        let clip = load_audio(&p, sid()).unwrap();
        assert_eq!(clip.pcm.len(), 2000);
        assert!(clip.pcm.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn five_seconds_at_other_rate_is_resampled() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.wav");
        write_raw(&p, 1, 44100, &vec![0; 5 * 44100]);
        assert_eq!(load_audio(&p, sid()).unwrap().pcm.len(), 110_250);
        let p = dir.path().join("q.wav");
        write_raw(&p, 1, 22050, &vec![0; 5 * 22050]);
        assert_eq!(load_audio(&p, sid()).unwrap().pcm.len(), 110_250);
    }

    #[test]
    fn rejects_empty_and_float_audio() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.wav");
        write_raw(&p, 1, 22050, &[]);
        assert!(load_audio(&p, sid()).is_err());

        let p = dir.path().join("f.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 22050,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        w.write_sample(0.5f32).unwrap();
        w.finalize().unwrap();
        assert!(matches!(load_audio(&p, sid()), Err(Error::UnsupportedAudio(_))));
    }

    #[test]
    fn write_then_load_is_quantised_copy() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.wav");
        let pcm: Vec<f64> = (0..1000).map(|i| ((i as f64) * 0.01).sin() * 0.8).collect();
        write_wav(&p, &pcm, 22050).unwrap();
        let back = load_audio(&p, sid()).unwrap();
        for (a, b) in pcm.iter().zip(&back.pcm) {
            assert!((a - b).abs() <= 0.5 / 32768.0 + 1e-12);
        }
    }
}
