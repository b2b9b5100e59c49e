use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use wearauth_core::augment::{augment_with, NoiseBank};
use wearauth_core::authd::{authenticate, estimate_latency, AuthContext, ModelSet, Outcome, SessionLog, SessionRecord};
use wearauth_core::eval::{aggregate, eer, threshold_sweep, MetricReport};
use wearauth_core::features::{feature_names, write_feature_csv, FeatureVector};
use wearauth_core::ingest::{load_audio_at, synth_dataset, SubjectRecording};
use wearauth_core::learn::{grid_search, train_model, ClassifierKind, TrainedModel};
use wearauth_core::pipeline::{
    build_instances_with, deployment_rows, evaluate as run_protocol, load_recordings, write_recordings, EvalConfig,
    HyperChoice, InstanceTable,
};
use wearauth_core::report::{
    box_svg, curve_svg, read_scores, write_aggregate_table, write_curve, write_fold_reports, write_scores, write_svg,
};
use wearauth_core::segment::{extract_events, windowize, BreathingEvent, EventOrigin, EventRef};
use wearauth_core::{ModelKind, SubjectId};

use crate::config::Config;

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn noise_bank(cfg: &Config) -> Result<NoiseBank> {
    Ok(match &cfg.noise_dir {
        Some(dir) => NoiseBank::load_dir(dir).with_context(|| format!("loading noise bank {}", dir.display()))?,
        None => NoiseBank::synthetic(),
    })
}

fn load_table(cfg: &Config, data: &Path, model: ModelKind) -> Result<InstanceTable> {
    let recs = load_recordings(data).with_context(|| format!("loading dataset {}", data.display()))?;
    if recs.len() < 2 {
        bail!(wearauth_core::Error::InvalidData(format!(
            "{}: need at least 2 subjects, found {}",
            data.display(),
            recs.len()
        )));
    }
    Ok(build_instances_with(&recs, model, &noise_bank(cfg)?, &cfg.instance_options())?)
}

fn subject_index(subjects: &[SubjectId], name: &str) -> Result<usize> {
    subjects.iter().position(|s| s.as_str() == name).ok_or_else(|| {
        wearauth_core::Error::InvalidArgument(format!("unknown subject `{name}`")).into()
    })
}

pub fn synth(seed: u64, subjects: usize, separation: f64, out: &Path, noise_out: Option<&Path>) -> Result<()> {
    let data = synth_dataset(seed, subjects, separation)?;
    write_recordings(out, &data.subjects)?;
    if let Some(dir) = noise_out {
        NoiseBank::synthetic().write_dir(dir)?;
    }
    println!("wrote {} subjects to {}", data.subjects.len(), out.display());
    Ok(())
}

pub fn augment(cfg: &Config, events_dir: &Path, out: &Path, subject: &str) -> Result<()> {
    let mut paths: Vec<PathBuf> = fs::read_dir(events_dir)
        .with_context(|| format!("cannot read {}", events_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!(wearauth_core::Error::InvalidData(format!("no WAV files in {}", events_dir.display())));
    }
    let subject = SubjectId::new(subject)?;
    let stems: Vec<String> = paths
        .iter()
        .map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    let events = paths
        .iter()
        .zip(&stems)
        .enumerate()
        .map(|(ordinal, (path, stem))| {
            let clip = load_audio_at(path, subject.clone(), cfg.sample_rate)?;
            Ok(BreathingEvent {
                subject: subject.clone(),
                pcm: clip.pcm,
                sample_rate: clip.sample_rate,
                origin: EventOrigin::Original(EventRef {
                    clip: stem.clone(),
                    ordinal,
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let specs = cfg.specs();
    let variants = augment_with(&events, &specs, &noise_bank(cfg)?)?;
    create_dir(out)?;
    let mut manifest = String::from("file,parent,ordinal,spec\n");
    for (i, v) in variants.iter().enumerate() {
        let (parent, j) = (i / specs.len(), i % specs.len());
        let name = format!("{}_{j:03}.wav", stems[parent]);
        wearauth_core::ingest::write_wav(out.join(&name), &v.pcm, v.sample_rate)?;
        let _ = writeln!(manifest, "{name},{},{parent},{}", stems[parent], specs[j]);
    }
    let path = out.join("manifest.csv");
    fs::write(&path, manifest).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {} augmented events to {}", variants.len(), out.display());
    Ok(())
}

pub fn featurize(cfg: &Config, data: &Path, out: &Path, model: ModelKind) -> Result<()> {
    let table = load_table(cfg, data, model)?;
    let names = feature_names(model);
    let rows: Vec<FeatureVector> = table
        .subjects
        .iter()
        .enumerate()
        .flat_map(|(s, subject)| {
            let names = &names;
            table.rows[s].iter().zip(&table.groups[s]).map(move |(values, &group)| FeatureVector {
                subject: subject.clone(),
                group,
                names: names.clone(),
                values: values.clone(),
            })
        })
        .collect();
    create_dir(out)?;
    let path = out.join(format!("{}_features.csv", model.as_str()));
    write_feature_csv(&path, &rows)?;
    println!("wrote {} rows of {} features to {}", rows.len(), names.len(), path.display());
    Ok(())
}

fn deploy(
    cfg: &Config,
    table: &InstanceTable,
    subject: usize,
    classifier: ClassifierKind,
    grid: bool,
) -> Result<TrainedModel> {
    let (rows, valid) = deployment_rows(table, subject, cfg.seed)?;
    let opts = cfg.train_options();
    let hyper = if grid {
        grid_search(table.model, &cfg.grid(classifier), &rows, &valid, cfg.grid_folds, &opts)?.0
    } else {
        cfg.preset(classifier, table.model)
    }
    .with_seed(cfg.seed);
    Ok(train_model(table.model, hyper, &rows, &valid, &opts)?)
}

pub fn train(
    cfg: &Config,
    data: &Path,
    out: Option<PathBuf>,
    model: ModelKind,
    subject: &str,
    classifier: ClassifierKind,
    grid: bool,
) -> Result<()> {
    let table = load_table(cfg, data, model)?;
    let s = subject_index(&table.subjects, subject)?;
    let trained = deploy(cfg, &table, s, classifier, grid)?;
    let path = out.unwrap_or_else(|| cfg.output_dir.join(format!("{subject}_{}_{classifier}.json", model.as_str())));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    trained.save(&path)?;
    println!("{model} {subject}: {}", trained.hyperparameters);
    println!("features: {}", trained.selected_names().join(", "));
    println!("wrote {}", path.display());
    Ok(())
}

pub fn evaluate(
    cfg: &Config,
    data: &Path,
    out: &Path,
    model: ModelKind,
    kinds: &[ClassifierKind],
    grid: bool,
) -> Result<()> {
    let table = load_table(cfg, data, model)?;
    let subjects: Vec<String> = table.subjects.iter().map(|s| s.to_string()).collect();
    create_dir(out)?;
    let m = model.as_str();
    let mut rows = Vec::new();
    for &kind in kinds {
        let hyper = if grid {
            HyperChoice::GridSearch {
                grid: cfg.grid(kind),
                folds: cfg.grid_folds,
            }
        } else {
            HyperChoice::Fixed(cfg.preset(kind, model))
        };
        let eval_cfg = EvalConfig {
            hyper,
            threshold: cfg.eval_threshold,
            train: cfg.train_options(),
            ..EvalConfig::new(kind, cfg.seed)
        };
        let result = run_protocol(&table, &eval_cfg)?;
        write_fold_reports(out.join(format!("{m}_{kind}_report.csv")), &result.reports)?;
        write_scores(out.join(format!("{m}_{kind}_scores.csv")), &subjects, &result.scores)?;
        let metrics: Vec<MetricReport> = result.reports.iter().map(|r| r.metrics).collect();
        let agg = aggregate(&metrics)?;
        let label = if grid {
            format!("{kind} (grid search)")
        } else {
            cfg.preset(kind, model).to_string()
        };
        write_svg(out.join(format!("{m}_{kind}_box.svg")), &box_svg(&agg, &format!("{model}: {label}")))?;
        println!("{model} {kind}: {} folds", result.reports.len());
        rows.push((label, agg));
    }
    let path = out.join(format!("{m}_aggregate.md"));
    write_aggregate_table(&path, &rows)?;
    print!("{}", wearauth_core::report::aggregate_table(&rows));
    println!("wrote reports to {}", out.display());
    Ok(())
}

pub fn curves(scores: &Path, out: &Path) -> Result<()> {
    let (conf, valid) = read_scores(scores)?;
    let curve = threshold_sweep(&conf, &valid)?;
    let e = eer(&curve)?;
    create_dir(out)?;
    write_curve(out.join("curve.csv"), &curve)?;
    write_svg(out.join("curve.svg"), &curve_svg(&curve, "Error rates against confidence threshold"))?;
    if e.no_crossing {
        println!("EER {:.4} at threshold {:.4} (FAR and FRR never cross)", e.rate, e.threshold);
    } else {
        println!("EER {:.4} at threshold {:.4}", e.rate, e.threshold);
    }
    Ok(())
}

fn median_period(rec: &SubjectRecording) -> Result<f64> {
    let mut d: Vec<f64> = rec
        .heart_rate
        .samples
        .windows(2)
        .map(|w| w[1].timestamp - w[0].timestamp)
        .collect();
    if d.is_empty() {
        bail!(wearauth_core::Error::InvalidData("heart-rate series is too short".into()));
    }
    d.sort_by(f64::total_cmp);
    Ok(d[d.len() / 2])
}

pub fn simulate(
    cfg: &Config,
    data: &Path,
    out: &Path,
    subject: Option<&str>,
    wearer: Option<&str>,
    sessions: usize,
    classifier: ClassifierKind,
) -> Result<()> {
    let recs = load_recordings(data).with_context(|| format!("loading dataset {}", data.display()))?;
    let ids: Vec<SubjectId> = recs.iter().map(|r| r.subject().clone()).collect();
    let enrolled = match subject {
        Some(name) => subject_index(&ids, name)?,
        None => 0,
    };
    let wearer = match wearer {
        Some(name) => subject_index(&ids, name)?,
        None => enrolled,
    };
    if recs.len() < 2 {
        bail!(wearauth_core::Error::InvalidData("need at least 2 subjects".into()));
    }
    let bank = noise_bank(cfg)?;
    let opts = cfg.instance_options();
    let models = ModelKind::ALL
        .iter()
        .map(|&m| {
            let table = build_instances_with(&recs, m, &bank, &opts)?;
            deploy(cfg, &table, enrolled, classifier, false)
        })
        .collect::<Result<Vec<_>>>()?;
    let set = ModelSet {
        hr: &models[0],
        hrg: Some(&models[1]),
        hrb: Some(&models[2]),
    };

    let rec = &recs[wearer];
    let spp = match cfg.seconds_per_sample {
        Some(x) => x,
        None => median_period(rec)?,
    };
    let hr = windowize(&rec.heart_rate, cfg.window_len, cfg.window_step)?;
    let gait = windowize(&rec.gait, cfg.window_len, cfg.window_step)?;
    let events = extract_events(&rec.breathing);
    if hr.is_empty() || gait.is_empty() || events.is_empty() {
        bail!(wearauth_core::Error::InvalidData(format!(
            "{}: not enough data to build a context",
            ids[wearer]
        )));
    }
    // Contexts start after the windows used for training.
    let start = opts.instances_per_subject();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let file = fs::File::create(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut log = SessionLog::new(BufWriter::new(file));
    let mut accepted = 0;
    for i in 0..sessions {
        let ctx = AuthContext::new(
            hr[(start + i) % hr.len()].clone(),
            Some(gait[(start + i) % gait.len()].clone()),
            Some(events[i % events.len()].clone()),
            cfg.tau_move,
        )?;
        let decision = authenticate(&ctx, &set, cfg.theta)?;
        accepted += usize::from(decision.outcome == Outcome::Accept);
        log.append(&SessionRecord::new(&ctx, &decision, spp)?)?;
    }
    let mut w = log.into_inner();
    std::io::Write::flush(&mut w).with_context(|| format!("cannot write {}", out.display()))?;
    println!(
        "{} wearing {}'s device: {accepted}/{sessions} accepted; log at {}",
        ids[wearer],
        ids[enrolled],
        out.display()
    );
    Ok(())
}

pub fn latency(x: f64, route: ModelKind) -> Result<()> {
    let t = estimate_latency(x, route)?;
    println!("{}", (t * 1e9).round() / 1e9);
    Ok(())
}
