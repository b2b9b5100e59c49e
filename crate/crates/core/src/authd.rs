//! Context-driven continuous authentication: heart rate first, then gait
//! and heart rate while moving or breathing and heart rate while still.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{fuse, gait_features, heart_rate_features, mfcc, ModelKind, Parts};
use crate::learn::TrainedModel;
use crate::segment::{BreathingEvent, SampleWindow, WindowKind};

pub const DEFAULT_THRESHOLD: f64 = 0.52;
pub const DEFAULT_MOVEMENT_THRESHOLD: f64 = 0.5;
/// Average breathing-event length in seconds.
pub const BREATHING_EVENT_S: f64 = 1.4;
/// Heart-rate samples per window.
const HR_WINDOW_SAMPLES: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Movement {
    Sedentary,
    NonSedentary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Accept,
    Revoke,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    AboveThreshold,
    BelowThreshold,
    MissingModality,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Accept => "accept",
            Outcome::Revoke => "revoke",
        })
    }
}

/// NonSedentary iff the population standard deviation of the acceleration
/// magnitude exceeds `tau`.
pub fn detect_movement(gait: &SampleWindow, tau: f64) -> Result<Movement> {
    if gait.kind != WindowKind::Gait {
        return Err(Error::data("movement detection needs a gait window"));
    }
    gait.validate()?;
    let mag: Vec<f64> = (0..gait.window_len())
        .map(|i| (0..3).map(|a| gait.channels[a][i].powi(2)).sum::<f64>().sqrt())
        .collect();
    let n = mag.len() as f64;
    let mean = mag.iter().sum::<f64>() / n;
    let std = (mag.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(if std > tau {
        Movement::NonSedentary
    } else {
        Movement::Sedentary
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthContext {
    pub hr_window: SampleWindow,
    pub gait_window: Option<SampleWindow>,
    pub breathing_event: Option<BreathingEvent>,
    pub movement: Movement,
}

impl AuthContext {
    /// Movement is detected from the gait window; without one the wearer
    /// is taken to be still.
    pub fn new(
        hr_window: SampleWindow,
        gait_window: Option<SampleWindow>,
        breathing_event: Option<BreathingEvent>,
        tau: f64,
    ) -> Result<Self> {
        let movement = match &gait_window {
            Some(g) => detect_movement(g, tau)?,
            None => Movement::Sedentary,
        };
        Ok(AuthContext {
            hr_window,
            gait_window,
            breathing_event,
            movement,
        })
    }

    /// Fused feature row for one model, or None when a modality is absent.
    pub fn features(&self, model: ModelKind) -> Result<Option<Vec<f64>>> {
        let subject = &self.hr_window.subject;
        let hr = heart_rate_features(&self.hr_window)?;
        let mut parts = Parts {
            heart_rate: Some((subject, &hr)),
            ..Parts::default()
        };
        let gait;
        let breath;
        match model {
            ModelKind::Hr => {}
            ModelKind::Hrg => match &self.gait_window {
                Some(g) => {
                    gait = gait_features(g)?;
                    parts.gait = Some((&g.subject, &gait));
                }
                None => return Ok(None),
            },
            ModelKind::Hrb => match &self.breathing_event {
                Some(e) => {
                    breath = mfcc(e)?;
                    parts.breathing = Some((&e.subject, &breath));
                }
                None => return Ok(None),
            },
        }
        Ok(Some(fuse(model, 0, &parts)?.values))
    }
}

/// Anything that turns a context into a confidence for one route.
pub trait ConfidenceModel {
    /// None when the context lacks the modality the model needs.
    fn confidence(&self, ctx: &AuthContext) -> Result<Option<f64>>;
}

impl ConfidenceModel for TrainedModel {
    fn confidence(&self, ctx: &AuthContext) -> Result<Option<f64>> {
        Ok(ctx.features(self.model_kind)?.map(|row| TrainedModel::confidence(self, &row)))
    }
}

pub struct ModelSet<'a> {
    pub hr: &'a dyn ConfidenceModel,
    pub hrg: Option<&'a dyn ConfidenceModel>,
    pub hrb: Option<&'a dyn ConfidenceModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthDecision {
    pub outcome: Outcome,
    pub route: ModelKind,
    /// Confidence of the terminal route; the heart-rate confidence when the
    /// terminal modality was missing.
    pub confidence: f64,
    pub threshold: f64,
    pub reason: Reason,
    /// Routes whose models were evaluated, in order.
    pub evaluated: Vec<ModelKind>,
}

pub fn authenticate(ctx: &AuthContext, models: &ModelSet<'_>, threshold: f64) -> Result<AuthDecision> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::arg(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    if ctx.movement == Movement::NonSedentary && ctx.gait_window.is_none() {
        return Err(Error::data("a moving context needs a gait window"));
    }
    let decide = |route, confidence: f64, evaluated| {
        let accept = confidence >= threshold;
        AuthDecision {
            outcome: if accept { Outcome::Accept } else { Outcome::Revoke },
            route,
            confidence,
            threshold,
            reason: if accept {
                Reason::AboveThreshold
            } else {
                Reason::BelowThreshold
            },
            evaluated,
        }
    };
    let hr = models
        .hr
        .confidence(ctx)?
        .ok_or_else(|| Error::data("heart-rate window is required"))?;
    if hr >= threshold {
        return Ok(decide(ModelKind::Hr, hr, vec![ModelKind::Hr]));
    }
    let (route, model) = match ctx.movement {
        Movement::NonSedentary => (ModelKind::Hrg, models.hrg),
        Movement::Sedentary => (ModelKind::Hrb, models.hrb),
    };
    let model = model.ok_or_else(|| Error::MissingModel(route.to_string()))?;
    Ok(match model.confidence(ctx)? {
        Some(c) => decide(route, c, vec![ModelKind::Hr, route]),
        None => AuthDecision {
            outcome: Outcome::Revoke,
            route,
            confidence: hr,
            threshold,
            reason: Reason::MissingModality,
            evaluated: vec![ModelKind::Hr],
        },
    })
}

/// Seconds until a decision on `route` given `x` seconds per heart-rate
/// sample.
pub fn estimate_latency(x: f64, route: ModelKind) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::arg(format!("seconds per sample must be positive, got {x}")));
    }
    let one = HR_WINDOW_SAMPLES * x;
    Ok(match route {
        ModelKind::Hr => one,
        ModelKind::Hrg => 2.0 * one,
        ModelKind::Hrb if x >= 0.14 => 2.0 * one,
        ModelKind::Hrb => one + BREATHING_EVENT_S,
    })
}

/// One line of the session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub timestamp: f64,
    pub route: ModelKind,
    pub confidence: f64,
    pub threshold: f64,
    pub outcome: Outcome,
    pub reason: Reason,
    pub estimated_latency_s: f64,
}

impl SessionRecord {
    /// Stamped with the first heart-rate sample of the context.
    pub fn new(ctx: &AuthContext, decision: &AuthDecision, seconds_per_sample: f64) -> Result<Self> {
        Ok(SessionRecord {
            timestamp: ctx.hr_window.timestamp,
            route: decision.route,
            confidence: decision.confidence,
            threshold: decision.threshold,
            outcome: decision.outcome,
            reason: decision.reason,
            estimated_latency_s: estimate_latency(seconds_per_sample, decision.route)?,
        })
    }
}

/// JSON-lines session log.
pub struct SessionLog<W: Write> {
    out: W,
}

impl<W: Write> SessionLog<W> {
    pub fn new(out: W) -> Self {
        SessionLog { out }
    }

    pub fn append(&mut self, record: &SessionRecord) -> Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out
            .write_all(b"\n")
            .map_err(|e| Error::io("session log", e))
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
