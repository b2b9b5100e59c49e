use rayon::prelude::*;

use super::model::{train_model, ClassifierKind, Hyperparameters, TrainOptions};
use crate::error::{Error, Result};
use crate::eval::ConfusionCounts;
use crate::features::ModelKind;

/// Default search space for one classifier family, in grid order.
pub fn default_grid(kind: ClassifierKind, seed: u64) -> Vec<Hyperparameters> {
    let gammas = (1..=10).map(|i| i as f64 / 100.0);
    let cs = (1..=16).map(f64::from);
    match kind {
        ClassifierKind::SvmRbf => gammas
            .flat_map(|gamma| cs.clone().map(move |c| Hyperparameters::SvmRbf { gamma, c }))
            .collect(),
        ClassifierKind::SvmPoly => (1..=4)
            .flat_map(|degree| {
                cs.clone().map(move |c| Hyperparameters::SvmPoly {
                    degree,
                    c,
                    coef0: 0.0,
                })
            })
            .collect(),
        ClassifierKind::OneClassSvm => gammas
            .map(|gamma| Hyperparameters::OneClassSvm { gamma, nu: 0.5 })
            .collect(),
        ClassifierKind::Knn => (1..=40).map(|k| Hyperparameters::Knn { k }).collect(),
        ClassifierKind::NaiveBayes => vec![Hyperparameters::NaiveBayes],
        ClassifierKind::RandomForest => [150, 300, 450, 600]
            .into_iter()
            .map(|trees| Hyperparameters::RandomForest { trees, seed })
            .collect(),
    }
}

/// Fold index of every row: each class is dealt round-robin so the folds
/// keep the class balance.
pub fn stratified_folds(valid: &[bool], folds: usize) -> Vec<usize> {
    let mut seen = [0usize; 2];
    valid
        .iter()
        .map(|&v| {
            let c = &mut seen[v as usize];
            let f = *c % folds;
            *c += 1;
            f
        })
        .collect()
}

/// Mean F1 of one grid cell over the internal folds.
pub fn cross_validate(
    model: ModelKind,
    hyper: Hyperparameters,
    rows: &[Vec<f64>],
    valid: &[bool],
    folds: usize,
    opts: &TrainOptions,
) -> Result<f64> {
    let assignment = stratified_folds(valid, folds);
    let mut total = 0.0;
    for f in 0..folds {
        let (mut tr, mut tr_y, mut te, mut te_y) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for ((r, &v), &a) in rows.iter().zip(valid).zip(&assignment) {
            if a == f {
                te.push(r.clone());
                te_y.push(v);
            } else {
                tr.push(r.clone());
                tr_y.push(v);
            }
        }
        let m = train_model(model, hyper, &tr, &tr_y, opts)?;
        let predicted: Vec<bool> = te.iter().map(|r| m.confidence(r) >= 0.5).collect();
        total += ConfusionCounts::from_predictions(&predicted, &te_y).f1();
    }
    Ok(total / folds as f64)
}

/// Exhaustive search maximizing mean F1 over stratified internal folds.
/// Ties keep the earliest cell.
pub fn grid_search(
    model: ModelKind,
    grid: &[Hyperparameters],
    rows: &[Vec<f64>],
    valid: &[bool],
    folds: usize,
    opts: &TrainOptions,
) -> Result<(Hyperparameters, f64)> {
    if grid.is_empty() {
        return Err(Error::arg("hyper-parameter grid is empty"));
    }
    if folds < 2 {
        return Err(Error::arg(format!("grid search needs at least 2 folds, got {folds}")));
    }
    let scores = grid
        .par_iter()
        .map(|&h| cross_validate(model, h, rows, valid, folds, opts))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok((grid[best], scores[best]))
}
