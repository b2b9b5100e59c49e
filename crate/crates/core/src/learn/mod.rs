//! Classifiers, calibration and hyper-parameter search.

pub mod bayes;
pub mod calibrate;
pub mod forest;
pub mod grid;
pub mod kernel;
pub mod knn;
pub mod model;
pub mod smo;

pub use bayes::NaiveBayesModel;
pub use calibrate::{calibrate, Calibration};
pub use forest::ForestModel;
pub use grid::{default_grid, grid_search};
pub use kernel::Kernel;
pub use knn::KnnModel;
pub use model::{
    train_model, Classifier, ClassifierKind, ConfidenceMap, Hyperparameters, TrainOptions, TrainedModel,
};
pub use smo::{ocsvm_train, smo_train, OneClassSvmModel, SmoParams, SvmModel};
