//! Flat TOML run configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wearauth_core::augment::{enumerate_specs, AugmentationSpec};
use wearauth_core::learn::TrainOptions;
use wearauth_core::pipeline::InstanceOptions;
use wearauth_core::{ClassifierKind, Hyperparameters, ModelKind};

/// Every key with its default, shown by `--help`.
pub const KEYS: &str = "\
CONFIG KEYS (flat TOML; every key optional):
  data_dir = \"data\"              recordings, one subdirectory per subject
  noise_dir = \"<unset>\"          ten noise WAVs; a built-in bank when unset
  output_dir = \"out\"             where reports, models and logs go
  sample_rate = 22050            audio analysis rate, Hz
  window_len = 10                samples per heart-rate and gait window
  window_step = 5                samples between window starts
  augment_pitch = true           15 pitch shifts
  augment_speed = true           7 speed changes
  augment_noise = true           80 noise mixes
  k_features = 20                features kept by selection
  nu = 0.5                       one-class outlier fraction
  eval_threshold = 0.5           accept threshold for fold metrics
  grid_gamma = [0.01, ..., 0.1]  RBF and one-class gamma grid
  grid_c = [1, ..., 16]          SVM C grid
  grid_degree = [1, 2, 3, 4]     polynomial degree grid
  grid_k = [1, ..., 40]          kNN neighbour grid
  grid_trees = [150, 300, 450, 600]
  grid_folds = 3                 inner folds of the grid search
  theta = 0.52                   router confidence threshold
  tau_move = 0.5                 movement threshold, m/s²
  seed = 1
  subjects = 10                  synthetic subjects
  separation = 3.0               synthetic between-subject spread
  seconds_per_sample = <unset>   heart-rate period; taken from the data when unset

The config path comes from --config or WEARAUTH_CONFIG.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub data_dir: PathBuf,
    pub noise_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub sample_rate: u32,
    pub window_len: usize,
    pub window_step: usize,
    pub augment_pitch: bool,
    pub augment_speed: bool,
    pub augment_noise: bool,
    pub k_features: usize,
    pub nu: f64,
    pub eval_threshold: f64,
    pub grid_gamma: Vec<f64>,
    pub grid_c: Vec<f64>,
    pub grid_degree: Vec<u32>,
    pub grid_k: Vec<usize>,
    pub grid_trees: Vec<usize>,
    pub grid_folds: usize,
    pub theta: f64,
    pub tau_move: f64,
    pub seed: u64,
    pub subjects: usize,
    pub separation: f64,
    pub seconds_per_sample: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            data_dir: "data".into(),
            noise_dir: None,
            output_dir: "out".into(),
            sample_rate: 22_050,
            window_len: 10,
            window_step: 5,
            augment_pitch: true,
            augment_speed: true,
            augment_noise: true,
            k_features: 20,
            nu: 0.5,
            eval_threshold: 0.5,
            grid_gamma: (1..=10).map(|i| i as f64 / 100.0).collect(),
            grid_c: (1..=16).map(f64::from).collect(),
            grid_degree: vec![1, 2, 3, 4],
            grid_k: (1..=40).collect(),
            grid_trees: vec![150, 300, 450, 600],
            grid_folds: 3,
            theta: 0.52,
            tau_move: 0.5,
            seed: 1,
            subjects: 10,
            separation: 3.0,
            seconds_per_sample: None,
        }
    }
}

/// A configuration problem; reported as a usage error.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults when `path` is None.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Config::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |key: &str, why: &str| Err(ConfigError(format!("invalid value for `{key}`: {why}")));
        if self.sample_rate == 0 {
            return fail("sample_rate", "must be positive");
        }
        if self.window_len < 2 {
            return fail("window_len", "must be at least 2");
        }
        if self.window_step == 0 {
            return fail("window_step", "must be at least 1");
        }
        if !(self.augment_pitch || self.augment_speed || self.augment_noise) {
            return fail("augment_noise", "at least one augmentation family must be enabled");
        }
        if self.k_features == 0 {
            return fail("k_features", "must be at least 1");
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return fail("nu", "must lie in (0, 1]");
        }
        if !(self.eval_threshold > 0.0 && self.eval_threshold < 1.0) {
            return fail("eval_threshold", "must lie in (0, 1)");
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return fail("theta", "must lie in (0, 1)");
        }
        if !(self.tau_move >= 0.0 && self.tau_move.is_finite()) {
            return fail("tau_move", "must be non-negative");
        }
        if self.grid_gamma.is_empty() || self.grid_gamma.iter().any(|&g| !(g > 0.0)) {
            return fail("grid_gamma", "needs positive values");
        }
        if self.grid_c.is_empty() || self.grid_c.iter().any(|&c| !(c > 0.0)) {
            return fail("grid_c", "needs positive values");
        }
        if self.grid_degree.is_empty() || self.grid_degree.contains(&0) {
            return fail("grid_degree", "needs positive values");
        }
        if self.grid_k.is_empty() || self.grid_k.contains(&0) {
            return fail("grid_k", "needs positive values");
        }
        if self.grid_trees.is_empty() || self.grid_trees.contains(&0) {
            return fail("grid_trees", "needs positive values");
        }
        if self.grid_folds < 2 {
            return fail("grid_folds", "must be at least 2");
        }
        if self.subjects < 2 {
            return fail("subjects", "must be at least 2");
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return fail("separation", "must be non-negative");
        }
        if let Some(x) = self.seconds_per_sample {
            if !(x > 0.0 && x.is_finite()) {
                return fail("seconds_per_sample", "must be positive");
            }
        }
        Ok(())
    }

    /// Enabled augmentations in canonical order.
    pub fn specs(&self) -> Vec<AugmentationSpec> {
        enumerate_specs()
            .into_iter()
            .filter(|s| match s {
                AugmentationSpec::PitchShift { .. } => self.augment_pitch,
                AugmentationSpec::SpeedChange { .. } => self.augment_speed,
                AugmentationSpec::NoiseMix { .. } => self.augment_noise,
            })
            .collect()
    }

    pub fn instance_options(&self) -> InstanceOptions {
        InstanceOptions {
            window_len: self.window_len,
            window_step: self.window_step,
            specs: self.specs(),
            sample_rate: self.sample_rate,
        }
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            k_features: self.k_features,
            ..TrainOptions::default()
        }
    }

    /// Published settings, with the configured ν for one-class models.
    pub fn preset(&self, kind: ClassifierKind, model: ModelKind) -> Hyperparameters {
        match Hyperparameters::preset(kind, model) {
            Hyperparameters::OneClassSvm { gamma, .. } => Hyperparameters::OneClassSvm { gamma, nu: self.nu },
            h => h,
        }
    }

    /// Search space of one classifier family, in grid order.
    pub fn grid(&self, kind: ClassifierKind) -> Vec<Hyperparameters> {
        let cs = &self.grid_c;
        match kind {
            ClassifierKind::SvmRbf => self
                .grid_gamma
                .iter()
                .flat_map(|&gamma| cs.iter().map(move |&c| Hyperparameters::SvmRbf { gamma, c }))
                .collect(),
            ClassifierKind::SvmPoly => self
                .grid_degree
                .iter()
                .flat_map(|&degree| {
                    cs.iter().map(move |&c| Hyperparameters::SvmPoly {
                        degree,
                        c,
                        coef0: 0.0,
                    })
                })
                .collect(),
            ClassifierKind::OneClassSvm => self
                .grid_gamma
                .iter()
                .map(|&gamma| Hyperparameters::OneClassSvm { gamma, nu: self.nu })
                .collect(),
            ClassifierKind::Knn => self.grid_k.iter().map(|&k| Hyperparameters::Knn { k }).collect(),
            ClassifierKind::NaiveBayes => vec![Hyperparameters::NaiveBayes],
            ClassifierKind::RandomForest => self
                .grid_trees
                .iter()
                .map(|&trees| Hyperparameters::RandomForest { trees, seed: self.seed })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wearauth_core::learn::default_grid;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn defaults_match_core() {
        let cfg = Config::default();
        assert_eq!(cfg.specs(), enumerate_specs());
        assert_eq!(cfg.instance_options(), InstanceOptions::default());
        assert_eq!(cfg.train_options(), TrainOptions::default());
        for kind in ClassifierKind::ALL {
            assert_eq!(cfg.grid(kind), default_grid(kind, cfg.seed), "{kind}");
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::parse("thetta = 0.4\n").unwrap_err();
        assert!(err.0.contains("thetta"), "{err}");
    }

    #[test]
    fn bad_values_are_named() {
        let err = Config::parse("theta = 1.5\n").unwrap_err();
        assert!(err.0.contains("theta"), "{err}");
        let err = Config::parse("augment_pitch = false\naugment_speed = false\naugment_noise = false\n").unwrap_err();
        assert!(err.0.contains("augment"), "{err}");
        assert!(Config::parse("seed = \"one\"\n").is_err());
    }

    #[test]
    fn toggles_filter_specs() {
        let cfg = Config::parse("augment_noise = false\n").unwrap();
        assert_eq!(cfg.specs().len(), 22);
        assert_eq!(cfg.instance_options().instances_per_subject(), 132);
    }

    #[test]
    fn nu_reaches_presets_and_grid() {
        let cfg = Config::parse("nu = 0.2\n").unwrap();
        assert_eq!(
            cfg.preset(ClassifierKind::OneClassSvm, ModelKind::Hrb),
            Hyperparameters::OneClassSvm { gamma: 0.05, nu: 0.2 }
        );
        assert!(cfg
            .grid(ClassifierKind::OneClassSvm)
            .iter()
            .all(|h| matches!(h, Hyperparameters::OneClassSvm { nu, .. } if *nu == 0.2)));
    }
}
