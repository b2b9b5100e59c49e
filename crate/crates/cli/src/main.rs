//! `wearauth`: synthetic data, augmentation, features, training, evaluation
//! and session simulation from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wearauth_core::{ClassifierKind, ModelKind};

use crate::config::{Config, ConfigError, KEYS};

#[derive(Debug, Parser)]
#[command(name = "wearauth", version, about = "Implicit wearable authentication from heart rate plus gait or breathing", after_long_help = KEYS)]
struct Cli {
    /// TOML config file.
    #[arg(long, global = true, env = "WEARAUTH_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic dataset.
    Synth {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        subjects: Option<usize>,
        #[arg(long)]
        separation: Option<f64>,
        /// Dataset directory [default: data_dir].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the built-in noise bank here.
        #[arg(long)]
        noise_out: Option<PathBuf>,
    },
    /// Augment every breathing event WAV in a directory.
    Augment {
        /// Directory of single-event WAV files.
        #[arg(long)]
        events: PathBuf,
        /// Output directory [default: output_dir/augmented].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "events")]
        subject: String,
    },
    /// Write the fused feature matrix of one model.
    Featurize {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
    },
    /// Train a deployable model for one subject.
    Train {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[arg(long)]
        subject: String,
        #[arg(long, default_value = "svm-rbf", value_parser = parse_classifier)]
        classifier: ClassifierKind,
        /// Pick hyper-parameters by grid search instead of the presets.
        #[arg(long)]
        grid_search: bool,
    },
    /// Run the leave-one-group-out protocol and write reports.
    Evaluate {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        /// A classifier name or `all`.
        #[arg(long, default_value = "svm-rbf", value_parser = parse_classifiers)]
        classifier: Classifiers,
        /// Pick hyper-parameters per fold by grid search.
        #[arg(long)]
        grid_search: bool,
    },
    /// FAR/FRR against threshold from a scores file.
    Curves {
        #[arg(long)]
        scores: PathBuf,
        /// Output directory [default: output_dir].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay contexts of a wearer through the router and log decisions.
    Simulate {
        #[command(flatten)]
        io: Io,
        /// Enrolled subject [default: first].
        #[arg(long)]
        subject: Option<String>,
        /// Subject wearing the device [default: the enrolled one].
        #[arg(long)]
        wearer: Option<String>,
        #[arg(long, default_value_t = 20)]
        sessions: usize,
        #[arg(long, default_value = "svm-rbf", value_parser = parse_classifier)]
        classifier: ClassifierKind,
    },
    /// Estimated seconds until a decision.
    Latency {
        /// Seconds per heart-rate sample.
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, value_parser = parse_model)]
        route: ModelKind,
    },
}

#[derive(Debug, Args)]
struct Io {
    /// Dataset directory [default: data_dir].
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output location [default: output_dir].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
enum Classifiers {
    One(ClassifierKind),
    All,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: wearauth_core::Error| e.to_string())
}

fn parse_classifier(s: &str) -> Result<ClassifierKind, String> {
    s.parse().map_err(|e: wearauth_core::Error| e.to_string())
}

fn parse_classifiers(s: &str) -> Result<Classifiers, String> {
    if s == "all" {
        Ok(Classifiers::All)
    } else {
        parse_classifier(s).map(Classifiers::One)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    let out_or = |o: Option<PathBuf>| o.unwrap_or_else(|| cfg.output_dir.clone());
    let data_or = |d: Option<PathBuf>| d.unwrap_or_else(|| cfg.data_dir.clone());
    match cli.command {
        Command::Synth {
            seed,
            subjects,
            separation,
            out,
            noise_out,
        } => commands::synth(
            seed.unwrap_or(cfg.seed),
            subjects.unwrap_or(cfg.subjects),
            separation.unwrap_or(cfg.separation),
            &data_or(out),
            noise_out.as_deref(),
        ),
        Command::Augment { events, out, subject } => {
            let out = out.unwrap_or_else(|| cfg.output_dir.join("augmented"));
            commands::augment(&cfg, &events, &out, &subject)
        }
        Command::Featurize { io, model } => commands::featurize(&cfg, &data_or(io.data), &out_or(io.out), model),
        Command::Train {
            io,
            model,
            subject,
            classifier,
            grid_search,
        } => commands::train(
            &cfg,
            &data_or(io.data),
            io.out,
            model,
            &subject,
            classifier,
            grid_search,
        ),
        Command::Evaluate {
            io,
            model,
            classifier,
            grid_search,
        } => {
            let kinds = match classifier {
                Classifiers::One(k) => vec![k],
                Classifiers::All => ClassifierKind::ALL.to_vec(),
            };
            commands::evaluate(&cfg, &data_or(io.data), &out_or(io.out), model, &kinds, grid_search)
        }
        Command::Curves { scores, out } => commands::curves(&scores, &out_or(out)),
        Command::Simulate {
            io,
            subject,
            wearer,
            sessions,
            classifier,
        } => {
            let out = io.out.unwrap_or_else(|| cfg.output_dir.join("session.jsonl"));
            commands::simulate(
                &cfg,
                &data_or(io.data),
                &out,
                subject.as_deref(),
                wearer.as_deref(),
                sessions,
                classifier,
            )
        }
        Command::Latency { x, route } => commands::latency(x, route),
    }
}

/// 2 usage, 3 data, 4 non-convergence.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<wearauth_core::Error>() {
            return match e {
                wearauth_core::Error::InvalidArgument(_) => 2,
                wearauth_core::Error::NonConvergence { .. } => 4,
                _ => 3,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
