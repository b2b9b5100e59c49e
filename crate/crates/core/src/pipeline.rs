//! End-to-end plumbing: recordings → per-subject instance tables → folds →
//! trained models → reports.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{augment_with, enumerate_specs, AugmentationSpec, NoiseBank};
use crate::dsp;
use crate::error::{Error, Result};
use crate::eval::{evaluate_scores, plan_folds, FoldPlan, MetricReport, GROUPS_PER_SUBJECT, GROUP_SIZE};
use crate::features::{fuse, gait_features, heart_rate_features, MfccConfig, MfccExtractor, ModelKind, Parts};
use crate::ingest::{
    load_audio, load_gait, load_heart_rate, write_gait, write_heart_rate, write_wav, AudioClip, SubjectId,
    SubjectRecording, ANALYSIS_RATE,
};
use crate::learn::{default_grid, grid_search, train_model, ClassifierKind, Hyperparameters, TrainOptions};
use crate::segment::{extract_events, windowize, DEFAULT_STEP, DEFAULT_WINDOW_LEN};

/// Instances kept per subject.
pub const INSTANCES_PER_SUBJECT: usize = GROUPS_PER_SUBJECT * GROUP_SIZE;

pub const HR_FILE: &str = "hr.csv";
pub const GAIT_FILE: &str = "gait.csv";
pub const BREATHING_FILE: &str = "breathing.wav";

/// Writes `dir/<subject>/{hr.csv,gait.csv,breathing.wav}`.
pub fn write_recordings(dir: impl AsRef<Path>, recordings: &[SubjectRecording]) -> Result<()> {
    for r in recordings {
        let sub = dir.as_ref().join(r.subject().as_str());
        std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        write_heart_rate(sub.join(HR_FILE), &r.heart_rate)?;
        write_gait(sub.join(GAIT_FILE), &r.gait)?;
        write_wav(sub.join(BREATHING_FILE), &r.breathing.pcm, r.breathing.sample_rate)?;
    }
    Ok(())
}

/// Reads every subject directory under `dir`, in name order.
pub fn load_recordings(dir: impl AsRef<Path>) -> Result<Vec<SubjectRecording>> {
    let dir = dir.as_ref();
    let mut subs: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subs.sort();
    if subs.is_empty() {
        return Err(Error::data(format!("no subject directories in {}", dir.display())));
    }
    subs.iter()
        .map(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let id = SubjectId::new(name)?;
            Ok(SubjectRecording {
                heart_rate: load_heart_rate(p.join(HR_FILE), id.clone())?,
                gait: load_gait(p.join(GAIT_FILE), id.clone())?,
                breathing: load_audio(p.join(BREATHING_FILE), id)?,
            })
        })
        .collect()
}

/// Fused feature rows of all subjects for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceTable {
    pub model: ModelKind,
    pub subjects: Vec<SubjectId>,
    /// `rows[s][i]`: instance `i` of subject `s`.
    pub rows: Vec<Vec<Vec<f64>>>,
    /// Fold group of every instance.
    pub groups: Vec<Vec<usize>>,
    /// Original event (or window block) every instance descends from.
    pub roots: Vec<Vec<usize>>,
}

/// Knobs of the instance builder.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOptions {
    pub window_len: usize,
    pub window_step: usize,
    /// Augmentations applied to each of the six original events.
    pub specs: Vec<AugmentationSpec>,
    /// Rate the breathing audio is analysed at.
    pub sample_rate: u32,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        InstanceOptions {
            window_len: DEFAULT_WINDOW_LEN,
            window_step: DEFAULT_STEP,
            specs: enumerate_specs(),
            sample_rate: ANALYSIS_RATE,
        }
    }
}

impl InstanceOptions {
    pub fn instances_per_subject(&self) -> usize {
        GROUPS_PER_SUBJECT * self.specs.len()
    }
}

/// Instances of one subject for one model: 612 with the default options.
/// Window `i` is paired with augmented event `i`; surplus windows are
/// dropped and the rest fall into 6 contiguous blocks.
pub fn subject_instances(
    rec: &SubjectRecording,
    model: ModelKind,
    bank: &NoiseBank,
    opts: &InstanceOptions,
) -> Result<(Vec<Vec<f64>>, Vec<usize>, Vec<usize>)> {
    let n = opts.instances_per_subject();
    if n == 0 {
        return Err(Error::arg("no augmentation specs selected"));
    }
    let group_size = n / GROUPS_PER_SUBJECT;
    let subject = rec.subject();
    let hr_windows = windowize(&rec.heart_rate, opts.window_len, opts.window_step)?;
    if hr_windows.len() < n {
        return Err(Error::data(format!(
            "{subject}: {} heart-rate windows, need {n}",
            hr_windows.len()
        )));
    }
    let hr: Vec<_> = hr_windows[..n]
        .par_iter()
        .map(heart_rate_features)
        .collect::<Result<_>>()?;
    let block: Vec<usize> = (0..n).map(|i| i / group_size).collect();
    let mut gait = Vec::new();
    let mut coeffs = Vec::new();
    let mut groups = block.clone();
    match model {
        ModelKind::Hr => {}
        ModelKind::Hrg => {
            let gw = windowize(&rec.gait, opts.window_len, opts.window_step)?;
            if gw.len() < n {
                return Err(Error::data(format!("{subject}: {} gait windows, need {n}", gw.len())));
            }
            gait = gw[..n].par_iter().map(gait_features).collect::<Result<_>>()?;
        }
        ModelKind::Hrb => {
            let events = if rec.breathing.sample_rate == opts.sample_rate {
                extract_events(&rec.breathing)
            } else {
                let pcm = dsp::resample(&rec.breathing.pcm, rec.breathing.sample_rate, opts.sample_rate);
                extract_events(&AudioClip::new(subject.clone(), pcm, opts.sample_rate)?)
            };
            if events.len() < GROUPS_PER_SUBJECT {
                return Err(Error::data(format!(
                    "{subject}: {} breathing events detected, need {GROUPS_PER_SUBJECT}",
                    events.len()
                )));
            }
            let variants = augment_with(&events[..GROUPS_PER_SUBJECT], &opts.specs, bank)?;
            let extractor = MfccExtractor::new(MfccConfig {
                sample_rate: opts.sample_rate,
                ..MfccConfig::default()
            })?;
            coeffs = variants.par_iter().map(|v| extractor.event(v)).collect::<Result<_>>()?;
            groups = variants.iter().map(|v| v.group()).collect();
        }
    }
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let parts = Parts {
                heart_rate: Some((subject, &hr[i])),
                gait: gait.get(i).map(|g| (subject, g)),
                breathing: coeffs.get(i).map(|c| (subject, c)),
            };
            Ok(fuse(model, groups[i], &parts)?.values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, groups.clone(), groups))
}

/// Instance table with the default options.
pub fn build_instances(recordings: &[SubjectRecording], model: ModelKind, bank: &NoiseBank) -> Result<InstanceTable> {
    build_instances_with(recordings, model, bank, &InstanceOptions::default())
}

pub fn build_instances_with(
    recordings: &[SubjectRecording],
    model: ModelKind,
    bank: &NoiseBank,
    opts: &InstanceOptions,
) -> Result<InstanceTable> {
    let mut t = InstanceTable {
        model,
        subjects: Vec::new(),
        rows: Vec::new(),
        groups: Vec::new(),
        roots: Vec::new(),
    };
    for rec in recordings {
        let (rows, groups, roots) = subject_instances(rec, model, bank, opts)?;
        t.subjects.push(rec.subject().clone());
        t.rows.push(rows);
        t.groups.push(groups);
        t.roots.push(roots);
    }
    Ok(t)
}

/// How each fold picks its hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum HyperChoice {
    Preset,
    Fixed(Hyperparameters),
    /// Exhaustive search on the fold's training rows.
    GridSearch { grid: Vec<Hyperparameters>, folds: usize },
}

impl HyperChoice {
    pub fn default_grid(kind: ClassifierKind, seed: u64) -> Self {
        HyperChoice::GridSearch {
            grid: default_grid(kind, seed),
            folds: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub classifier: ClassifierKind,
    pub hyper: HyperChoice,
    pub seed: u64,
    /// Accept iff confidence ≥ this.
    pub threshold: f64,
    pub train: TrainOptions,
}

impl EvalConfig {
    pub fn new(classifier: ClassifierKind, seed: u64) -> Self {
        EvalConfig {
            classifier,
            hyper: HyperChoice::Preset,
            seed,
            threshold: 0.5,
            train: TrainOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub subject: SubjectId,
    pub fold: usize,
    pub model: ModelKind,
    pub classifier: ClassifierKind,
    pub hyperparameters: Hyperparameters,
    pub metrics: MetricReport,
}

/// Confidence of one test row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredRow {
    pub subject: usize,
    pub fold: usize,
    pub valid: bool,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub plans: Vec<FoldPlan>,
    pub reports: Vec<FoldReport>,
    pub scores: Vec<ScoredRow>,
}

/// Runs the full fold protocol for one model and classifier. Folds train
/// in parallel; results come back in plan order.
pub fn evaluate(table: &InstanceTable, cfg: &EvalConfig) -> Result<Evaluation> {
    let plans = plan_folds(&table.subjects, &table.groups, cfg.seed)?;
    let results = plans
        .par_iter()
        .enumerate()
        .map(|(k, plan)| run_fold(table, plan, k, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut reports = Vec::with_capacity(results.len());
    let mut scores = Vec::new();
    for (r, s) in results {
        reports.push(r);
        scores.extend(s);
    }
    Ok(Evaluation { plans, reports, scores })
}

fn gather(table: &InstanceTable, refs: &[crate::eval::RowRef]) -> Vec<Vec<f64>> {
    refs.iter().map(|r| table.rows[r.subject][r.row].clone()).collect()
}

fn run_fold(table: &InstanceTable, plan: &FoldPlan, k: usize, cfg: &EvalConfig) -> Result<(FoldReport, Vec<ScoredRow>)> {
    let train = gather(table, &plan.train);
    let train_y = plan.train_labels();
    let fold_seed = cfg.seed.wrapping_add(k as u64);
    let hyper = match &cfg.hyper {
        HyperChoice::Preset => Hyperparameters::preset(cfg.classifier, table.model),
        HyperChoice::Fixed(h) => *h,
        HyperChoice::GridSearch { grid, folds } => grid_search(table.model, grid, &train, &train_y, *folds, &cfg.train)?.0,
    }
    .with_seed(fold_seed);
    let model = train_model(table.model, hyper, &train, &train_y, &cfg.train)?;
    let test = gather(table, &plan.test);
    let test_y = plan.test_labels();
    let conf: Vec<f64> = test.iter().map(|r| model.confidence(r)).collect();
    let metrics = evaluate_scores(&conf, &test_y, cfg.threshold)?;
    let scored = conf
        .iter()
        .zip(&test_y)
        .map(|(&confidence, &valid)| ScoredRow {
            subject: plan.subject_index,
            fold: plan.held_out_group,
            valid,
            confidence,
        })
        .collect();
    Ok((
        FoldReport {
            subject: plan.subject.clone(),
            fold: plan.held_out_group,
            model: table.model,
            classifier: cfg.classifier,
            hyperparameters: hyper,
            metrics,
        },
        scored,
    ))
}

/// Training rows for a deployable model of `subject`: all of its instances
/// plus an equal share drawn from every other subject.
pub fn deployment_rows(table: &InstanceTable, subject: usize, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<bool>)> {
    use rand::seq::index::sample;
    if subject >= table.subjects.len() || table.subjects.len() < 2 {
        return Err(Error::arg("subject index out of range"));
    }
    let own = &table.rows[subject];
    let per = own.len() / (table.subjects.len() - 1);
    let mut rows = own.clone();
    let mut valid = vec![true; own.len()];
    let mut rng = crate::rng::stream(seed, "deploy", subject as u64);
    for (_, other) in table.rows.iter().enumerate().filter(|&(o, _)| o != subject) {
        let mut idx: Vec<usize> = sample(&mut rng, other.len(), per.min(other.len())).into_vec();
        idx.sort_unstable();
        rows.extend(idx.into_iter().map(|i| other[i].clone()));
        valid.extend(std::iter::repeat_n(false, per.min(other.len())));
    }
    Ok((rows, valid))
}
