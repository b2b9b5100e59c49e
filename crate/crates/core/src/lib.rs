//! Context-dependent implicit authentication for wearables: heart rate
//! backed by gait while moving and by breathing audio while still.

pub mod augment;
pub mod authd;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod learn;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod segment;
pub mod select;

pub use augment::{augment_all, enumerate_specs, AugmentationSpec, NoiseBank};
pub use authd::{
    authenticate, detect_movement, estimate_latency, AuthContext, AuthDecision, ConfidenceModel, ModelSet,
    Movement, Outcome, Reason,
};
pub use error::{Error, Result};
pub use eval::{ConfusionCounts, FoldPlan, MetricReport};
pub use features::{FeatureVector, ModelKind, StatFeatureSet};
pub use ingest::{AudioClip, GaitSeries, HeartRateSeries, SubjectId, SubjectRecording};
pub use learn::{ClassifierKind, Hyperparameters, TrainedModel};
pub use segment::{BreathingEvent, SampleWindow};
pub use select::{Scaler, SelectionResult};
