use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bayes::NaiveBayesModel;
use super::calibrate::{calibrate, Calibration};
use super::forest::ForestModel;
use super::kernel::Kernel;
use super::knn::KnnModel;
use super::smo::{ocsvm_train, smo_train, OneClassSvmModel, SmoParams, SvmModel};
use crate::error::{Error, Result};
use crate::features::{feature_names, ModelKind};
use crate::select::{select_by_variance, select_k, Scaler, SelectionResult, DEFAULT_K};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    SvmRbf,
    SvmPoly,
    #[serde(rename = "ocsvm")]
    OneClassSvm,
    Knn,
    #[serde(rename = "nb")]
    NaiveBayes,
    #[serde(rename = "rf")]
    RandomForest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::RandomForest,
        ClassifierKind::Knn,
        ClassifierKind::NaiveBayes,
        ClassifierKind::SvmRbf,
        ClassifierKind::SvmPoly,
        ClassifierKind::OneClassSvm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::SvmRbf => "svm-rbf",
            ClassifierKind::SvmPoly => "svm-poly",
            ClassifierKind::OneClassSvm => "ocsvm",
            ClassifierKind::Knn => "knn",
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::RandomForest => "rf",
        }
    }

    /// Trained on the valid user alone.
    pub fn is_unary(self) -> bool {
        self == ClassifierKind::OneClassSvm
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::arg(format!(
                    "unknown classifier `{s}` (svm-rbf, svm-poly, ocsvm, knn, nb, rf)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "classifier", rename_all = "snake_case")]
pub enum Hyperparameters {
    SvmRbf { gamma: f64, c: f64 },
    SvmPoly { degree: u32, c: f64, coef0: f64 },
    OneClassSvm { gamma: f64, nu: f64 },
    Knn { k: usize },
    NaiveBayes,
    RandomForest { trees: usize, seed: u64 },
}

impl Hyperparameters {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Hyperparameters::SvmRbf { .. } => ClassifierKind::SvmRbf,
            Hyperparameters::SvmPoly { .. } => ClassifierKind::SvmPoly,
            Hyperparameters::OneClassSvm { .. } => ClassifierKind::OneClassSvm,
            Hyperparameters::Knn { .. } => ClassifierKind::Knn,
            Hyperparameters::NaiveBayes => ClassifierKind::NaiveBayes,
            Hyperparameters::RandomForest { .. } => ClassifierKind::RandomForest,
        }
    }

    /// Best-performing settings reported for each model and classifier.
    pub fn preset(kind: ClassifierKind, model: ModelKind) -> Self {
        use ModelKind::*;
        match kind {
            ClassifierKind::SvmRbf => {
                let (gamma, c) = match model {
                    Hr => (0.03, 3.0),
                    Hrg => (0.05, 5.0),
                    Hrb => (0.08, 4.0),
                };
                Hyperparameters::SvmRbf { gamma, c }
            }
            ClassifierKind::SvmPoly => {
                let (degree, c) = match model {
                    Hr => (1, 1.0),
                    Hrg => (3, 14.0),
                    Hrb => (4, 16.0),
                };
                Hyperparameters::SvmPoly {
                    degree,
                    c,
                    coef0: 0.0,
                }
            }
            ClassifierKind::OneClassSvm => Hyperparameters::OneClassSvm {
                gamma: 0.05,
                nu: 0.5,
            },
            ClassifierKind::Knn => Hyperparameters::Knn {
                k: match model {
                    Hr => 32,
                    Hrg => 24,
                    Hrb => 2,
                },
            },
            ClassifierKind::NaiveBayes => Hyperparameters::NaiveBayes,
            ClassifierKind::RandomForest => Hyperparameters::RandomForest {
                trees: match model {
                    Hr | Hrg => 450,
                    Hrb => 600,
                },
                seed: 0,
            },
        }
    }

    /// Same settings with the random seed (if any) replaced.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Hyperparameters::RandomForest { trees, .. } => Hyperparameters::RandomForest { trees, seed },
            other => other,
        }
    }
}

impl fmt::Display for Hyperparameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyperparameters::SvmRbf { gamma, c } => write!(f, "SVM (RBF kernel, γ={gamma}, C={c})"),
            Hyperparameters::SvmPoly { degree, c, .. } => write!(f, "SVM (Poly. kernel, d={degree}, C={c})"),
            Hyperparameters::OneClassSvm { gamma, nu } => write!(f, "SVM (RBF kernel, γ={gamma}, ν={nu})"),
            Hyperparameters::Knn { k } => write!(f, "k-NN (k={k}, minkowski distance)"),
            Hyperparameters::NaiveBayes => write!(f, "NB"),
            Hyperparameters::RandomForest { trees, .. } => write!(f, "RF (n estimators = {trees})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Classifier {
    Svm(SvmModel),
    OneClassSvm(OneClassSvmModel),
    Knn(KnnModel),
    NaiveBayes(NaiveBayesModel),
    RandomForest(ForestModel),
}

impl Classifier {
    /// SVM decision value, or the valid-class probability/vote share for
    /// the other classifiers.
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Classifier::Svm(m) => m.decision(x),
            Classifier::OneClassSvm(m) => m.decision(x),
            Classifier::Knn(m) => m.valid_fraction(x),
            Classifier::NaiveBayes(m) => m.valid_probability(x),
            Classifier::RandomForest(m) => m.valid_fraction(x),
        }
    }
}

/// How a classifier score becomes a confidence in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConfidenceMap {
    Sigmoid(Calibration),
    /// The score already is a probability or vote share.
    Identity,
}

impl ConfidenceMap {
    pub fn apply(&self, score: f64) -> f64 {
        match self {
            ConfidenceMap::Sigmoid(c) => c.confidence(score),
            ConfidenceMap::Identity => score,
        }
    }
}

/// Everything needed to score a raw fused feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub model_kind: ModelKind,
    pub hyperparameters: Hyperparameters,
    pub feature_names: Vec<String>,
    pub selected_features: SelectionResult,
    pub scaler: Scaler,
    pub calibration: ConfidenceMap,
    pub classifier: Classifier,
}

impl TrainedModel {
    fn prepare(&self, row: &[f64]) -> Vec<f64> {
        self.scaler.transform(&self.selected_features.project(row))
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        self.classifier.score(&self.prepare(row))
    }

    pub fn confidence(&self, row: &[f64]) -> f64 {
        self.calibration.apply(self.score(row))
    }

    /// Names of the selected features, best first.
    pub fn selected_names(&self) -> Vec<&str> {
        self.selected_features
            .kept
            .iter()
            .map(|&i| self.feature_names[i].as_str())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(json)?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(FORMAT_VERSION) => Ok(serde_json::from_value(value)?),
            Some(v) => Err(Error::data(format!(
                "model file format {v} is not supported (expected {FORMAT_VERSION})"
            ))),
            None => Err(Error::data("model file has no format_version")),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub k_features: usize,
    pub smo: SmoParams,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            k_features: DEFAULT_K,
            smo: SmoParams::default(),
        }
    }
}

/// Selects features, standardizes, trains and calibrates one model.
///
/// `valid[i]` is true for rows of the valid user. One-class models are fit
/// on the valid rows only.
pub fn train_model(
    model: ModelKind,
    hyper: Hyperparameters,
    rows: &[Vec<f64>],
    valid: &[bool],
    opts: &TrainOptions,
) -> Result<TrainedModel> {
    if rows.len() != valid.len() {
        return Err(Error::arg("rows and labels differ in length"));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != model.feature_count()) {
        return Err(Error::data(format!(
            "{model} rows need {} features, got {}",
            model.feature_count(),
            r.len()
        )));
    }

    let (selection, scaler, classifier, calibration) = if hyper.kind().is_unary() {
        let own: Vec<Vec<f64>> = rows.iter().zip(valid).filter(|(_, &v)| v).map(|(r, _)| r.clone()).collect();
        if own.is_empty() {
            return Err(Error::data("one-class training needs valid-user rows"));
        }
        let selection = select_by_variance(&own, opts.k_features)?;
        let (scaler, x) = Scaler::fit_transform(&selection.project_all(&own))?;
        let Hyperparameters::OneClassSvm { gamma, nu } = hyper else {
            unreachable!()
        };
        let m = ocsvm_train(&x, nu, gamma, opts.smo)?;
        (
            selection,
            scaler,
            Classifier::OneClassSvm(m),
            ConfidenceMap::Sigmoid(Calibration::ONE_CLASS),
        )
    } else {
        let selection = select_k(rows, valid, opts.k_features)?;
        let (scaler, x) = Scaler::fit_transform(&selection.project_all(rows))?;
        let (classifier, calibration) = match hyper {
            Hyperparameters::SvmRbf { gamma, c } => {
                fit_svm(&x, valid, Kernel::Rbf { gamma }, c, opts.smo)?
            }
            Hyperparameters::SvmPoly { degree, c, coef0 } => {
                fit_svm(&x, valid, Kernel::polynomial_auto(degree, coef0, &x), c, opts.smo)?
            }
            Hyperparameters::Knn { k } => (Classifier::Knn(KnnModel::train(&x, valid, k)?), ConfidenceMap::Identity),
            Hyperparameters::NaiveBayes => (
                Classifier::NaiveBayes(NaiveBayesModel::train(&x, valid)?),
                ConfidenceMap::Identity,
            ),
            Hyperparameters::RandomForest { trees, seed } => (
                Classifier::RandomForest(ForestModel::train(&x, valid, trees, seed)?),
                ConfidenceMap::Identity,
            ),
            Hyperparameters::OneClassSvm { .. } => unreachable!(),
        };
        (selection, scaler, classifier, calibration)
    };

    Ok(TrainedModel {
        format_version: FORMAT_VERSION,
        model_kind: model,
        hyperparameters: hyper,
        feature_names: feature_names(model),
        selected_features: selection,
        scaler,
        calibration,
        classifier,
    })
}

fn fit_svm(
    x: &[Vec<f64>],
    valid: &[bool],
    kernel: Kernel,
    c: f64,
    smo: SmoParams,
) -> Result<(Classifier, ConfidenceMap)> {
    let y: Vec<f64> = valid.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
    let m = smo_train(x, &y, kernel, c, smo)?;
    let decisions: Vec<f64> = x.iter().map(|r| m.decision(r)).collect();
    let cal = calibrate(&decisions, valid)?;
    Ok((Classifier::Svm(m), ConfidenceMap::Sigmoid(cal)))
}
