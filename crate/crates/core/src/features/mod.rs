//! Per-window statistics, per-event MFCCs, and their fusion into the
//! feature vectors of the HR, HRG and HRB models.

mod mfcc;
pub(crate) mod stats;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SubjectId;
use crate::segment::{SampleWindow, WindowKind};

pub use mfcc::{
    dct_matrix, frame_count, hz_to_mel, mel_filterbank, mel_to_hz, mfcc, MfccConfig,
    MfccExtractor, MfccVector, MFCC_COUNT,
};
pub use stats::{stat_features, StatFeatureSet, STAT_NAMES};

pub const GAIT_AXES: [&str; 6] = ["X-acc", "Y-acc", "Z-acc", "X-gy", "Y-gy", "Z-gy"];

/// Which biometrics a model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    /// Heart rate alone.
    #[serde(rename = "hr")]
    Hr,
    /// Heart rate and gait.
    #[serde(rename = "hrg")]
    Hrg,
    /// Heart rate and breathing audio.
    #[serde(rename = "hrb")]
    Hrb,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Hr, ModelKind::Hrg, ModelKind::Hrb];

    pub fn feature_count(self) -> usize {
        match self {
            ModelKind::Hr => 21,
            ModelKind::Hrg => 21 + 6 * 21,
            ModelKind::Hrb => 21 + MFCC_COUNT,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Hr => "hr",
            ModelKind::Hrg => "hrg",
            ModelKind::Hrb => "hrb",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_uppercase())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hr" => Ok(ModelKind::Hr),
            "hrg" => Ok(ModelKind::Hrg),
            "hrb" => Ok(ModelKind::Hrb),
            other => Err(Error::arg(format!("unknown model `{other}` (hr, hrg, hrb)"))),
        }
    }
}

/// Names of the fused features of `model`, in vector order. Heart-rate
/// statistics are unprefixed; gait statistics carry their axis
/// (`"Y-acc μ"`); MFCCs are `MFCC1..MFCC40` for coefficients 0..39.
pub fn feature_names(model: ModelKind) -> Vec<String> {
    let mut names: Vec<String> = STAT_NAMES.iter().map(|s| s.to_string()).collect();
    match model {
        ModelKind::Hr => {}
        ModelKind::Hrg => {
            for axis in GAIT_AXES {
                names.extend(STAT_NAMES.iter().map(|s| format!("{axis} {s}")));
            }
        }
        ModelKind::Hrb => names.extend((1..=MFCC_COUNT).map(|i| format!("MFCC{i}"))),
    }
    names
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub subject: SubjectId,
    pub group: usize,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

/// Statistics of the single heart-rate channel of a window.
pub fn heart_rate_features(window: &SampleWindow) -> Result<StatFeatureSet> {
    if window.kind != WindowKind::HeartRate {
        return Err(Error::data("expected a heart-rate window"));
    }
    window.validate()?;
    stat_features(&window.channels[0])
}

/// Statistics of each of the six gait channels, axis order ax..gz.
pub fn gait_features(window: &SampleWindow) -> Result<[StatFeatureSet; 6]> {
    if window.kind != WindowKind::Gait {
        return Err(Error::data("expected a gait window"));
    }
    window.validate()?;
    let mut out = [stat_features(&window.channels[0])?; 6];
    for (slot, ch) in out.iter_mut().zip(&window.channels).skip(1) {
        *slot = stat_features(ch)?;
    }
    Ok(out)
}

/// Per-biometric inputs to `fuse`, each tagged with its subject.
#[derive(Debug, Clone, Copy, Default)]
pub struct Parts<'a> {
    pub heart_rate: Option<(&'a SubjectId, &'a StatFeatureSet)>,
    pub gait: Option<(&'a SubjectId, &'a [StatFeatureSet; 6])>,
    pub breathing: Option<(&'a SubjectId, &'a MfccVector)>,
}

pub fn fuse(model: ModelKind, group: usize, parts: &Parts<'_>) -> Result<FeatureVector> {
    let (subject, hr) = parts
        .heart_rate
        .ok_or_else(|| Error::data("heart-rate features are required by every model"))?;
    let mut values: Vec<f64> = hr.to_array().to_vec();
    let check = |other: &SubjectId, what: &str| {
        if other != subject {
            Err(Error::data(format!(
                "{what} features belong to {other}, heart rate to {subject}"
            )))
        } else {
            Ok(())
        }
    };
    match model {
        ModelKind::Hr => {}
        ModelKind::Hrg => {
            let (s, axes) = parts
                .gait
                .ok_or_else(|| Error::data("HRG model needs gait features"))?;
            check(s, "gait")?;
            for a in axes {
                values.extend(a.to_array());
            }
        }
        ModelKind::Hrb => {
            let (s, m) = parts
                .breathing
                .ok_or_else(|| Error::data("HRB model needs breathing features"))?;
            check(s, "breathing")?;
            if m.0.len() != MFCC_COUNT {
                return Err(Error::data(format!("expected {MFCC_COUNT} MFCCs, got {}", m.0.len())));
            }
            values.extend_from_slice(&m.0);
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("non-finite feature value"));
    }
    Ok(FeatureVector {
        subject: subject.clone(),
        group,
        names: feature_names(model),
        values,
    })
}

/// Writes a feature matrix: `subject,group,<feature names...>`.
pub fn write_feature_csv(path: impl AsRef<Path>, rows: &[FeatureVector]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    if let Some(first) = rows.first() {
        let mut header = vec!["subject".to_string(), "group".to_string()];
        header.extend(first.names.iter().cloned());
        w.write_record(&header)?;
    }
    for r in rows {
        let mut rec = vec![r.subject.to_string(), r.group.to_string()];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.len() < 3 || header[0] != "subject" || header[1] != "group" {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "feature CSV must start with `subject,group`".into(),
        });
    }
    let names: Vec<String> = header[2..].to_vec();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |m: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: m,
        };
        if rec.len() != header.len() {
            return Err(bad(format!("expected {} columns, found {}", header.len(), rec.len())));
        }
        let group = rec[1]
            .parse()
            .map_err(|_| bad(format!("group `{}` is not an ordinal", &rec[1])))?;
        let values = rec
            .iter()
            .skip(2)
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("`{f}` is not a number"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(FeatureVector {
            subject: SubjectId::new(&rec[0])?,
            group,
            names: names.clone(),
            values,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sid(s: &str) -> SubjectId {
        SubjectId::new(s).unwrap()
    }

    fn stats(seed: f64) -> StatFeatureSet {
        stat_features(&[seed, seed + 1.0, seed + 3.0]).unwrap()
    }

    #[test]
    fn fused_lengths() {
        let s = sid("s01");
        let hr = stats(70.0);
        let gait = [stats(1.0); 6];
        let m = MfccVector(vec![0.5; 40]);
        let parts = Parts {
            heart_rate: Some((&s, &hr)),
            gait: Some((&s, &gait)),
            breathing: Some((&s, &m)),
        };
        assert_eq!(fuse(ModelKind::Hr, 0, &parts).unwrap().values.len(), 21);
        let hrg = fuse(ModelKind::Hrg, 0, &parts).unwrap();
        assert_eq!(hrg.values.len(), 147);
        assert_eq!(hrg.names[21 + 21 + 0], "Y-acc μ");
        let hrb = fuse(ModelKind::Hrb, 3, &parts).unwrap();
        assert_eq!(hrb.values.len(), 61);
        assert_eq!(hrb.names[23], "MFCC3");
        assert_eq!(hrb.group, 3);
        for k in ModelKind::ALL {
            let names = feature_names(k);
            assert_eq!(names.len(), k.feature_count());
            let mut dedup = names.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), names.len());
        }
    }

    #[test]
    fn fuse_errors() {
        let (a, b) = (sid("s01"), sid("s02"));
        let hr = stats(70.0);
        let m = MfccVector(vec![0.5; 40]);
        let missing = Parts {
            heart_rate: Some((&a, &hr)),
            ..Parts::default()
        };
        assert!(fuse(ModelKind::Hrb, 0, &missing).is_err());
        assert!(fuse(ModelKind::Hrg, 0, &missing).is_err());
        let mismatch = Parts {
            heart_rate: Some((&a, &hr)),
            breathing: Some((&b, &m)),
            ..Parts::default()
        };
        assert!(fuse(ModelKind::Hrb, 0, &mismatch).is_err());
        assert!(fuse(ModelKind::Hr, 0, &Parts::default()).is_err());
    }

    #[test]
    fn feature_csv_round_trip() {
        let s = sid("s01");
        let hr = stats(70.123456789);
        let parts = Parts {
            heart_rate: Some((&s, &hr)),
            ..Parts::default()
        };
        let rows = vec![fuse(ModelKind::Hr, 2, &parts).unwrap(); 3];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_feature_csv(&p, &rows).unwrap();
        assert_eq!(read_feature_csv(&p).unwrap(), rows);
    }
}
