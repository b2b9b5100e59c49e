use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;
use wearauth_core::TrainedModel;

fn wearauth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wearauth"))
        .args(args)
        .env_remove("WEARAUTH_CONFIG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = wearauth(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Ten synthetic subjects shared by every test.
fn dataset() -> &'static Path {
    static DIR: OnceLock<(TempDir, PathBuf)> = OnceLock::new();
    &DIR.get_or_init(|| {
        let tmp = TempDir::new().unwrap();
        let data = tmp.path().join("data");
        ok(&["synth", "--seed", "1", "--subjects", "10", "--out", s(&data)]);
        (tmp, data)
    })
    .1
}

#[test]
fn latency_examples() {
    assert_eq!(ok(&["latency", "--x", "60", "--route", "hr"]).trim(), "600");
    assert_eq!(ok(&["latency", "--x", "1", "--route", "hrg"]).trim(), "20");
    assert_eq!(ok(&["latency", "--x", "0.1", "--route", "hrb"]).trim(), "2.4");
    assert_eq!(ok(&["latency", "--x", "0.14", "--route", "hrb"]).trim(), "2.8");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(wearauth(&["latency", "--x", "-1", "--route", "hr"]).status.code(), Some(2));
    assert_eq!(wearauth(&["latency", "--x", "1", "--route", "hrx"]).status.code(), Some(2));
    assert_eq!(wearauth(&["bogus"]).status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_named() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("cfg.toml");
    std::fs::write(&cfg, "seed = 3\nwindow_lenght = 12\n").unwrap();
    let out = wearauth(&["--config", s(&cfg), "latency", "--x", "1", "--route", "hr"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("window_lenght"), "{err}");
}

#[test]
fn config_from_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("cfg.toml");
    std::fs::write(&cfg, "theta = 2.0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_wearauth"))
        .args(["latency", "--x", "1", "--route", "hr"])
        .env("WEARAUTH_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta"));
}

#[test]
fn missing_data_exits_3() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nothing");
    let out = wearauth(&["evaluate", "--model", "hr", "--data", s(&missing), "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

fn report_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn evaluate_is_deterministic() {
    let data = dataset();
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        ok(&["evaluate", "--model", "hr", "--data", s(data), "--out", s(out)]);
    }
    for name in ["hr_svm-rbf_report.csv", "hr_svm-rbf_scores.csv", "hr_aggregate.md", "hr_svm-rbf_box.svg"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
    assert_eq!(report_rows(&a.join("hr_svm-rbf_report.csv")), 60);

    let curves = tmp.path().join("curves");
    let stdout = ok(&["curves", "--scores", s(&a.join("hr_svm-rbf_scores.csv")), "--out", s(&curves)]);
    assert!(stdout.starts_with("EER "), "{stdout}");
    assert_eq!(report_rows(&curves.join("curve.csv")), 101);
    assert!(std::fs::read_to_string(curves.join("curve.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn evaluate_hrb_gives_sixty_rows() {
    let data = dataset();
    let tmp = TempDir::new().unwrap();
    let stdout = ok(&["evaluate", "--model", "hrb", "--classifier", "knn", "--data", s(data), "--out", s(tmp.path())]);
    assert!(stdout.contains("| Classifier |"), "{stdout}");
    assert_eq!(report_rows(&tmp.path().join("hrb_knn_report.csv")), 60);
    let table = std::fs::read_to_string(tmp.path().join("hrb_aggregate.md")).unwrap();
    assert!(table.contains("±"));
}

#[test]
fn featurize_writes_all_instances() {
    let data = dataset();
    let tmp = TempDir::new().unwrap();
    ok(&["featurize", "--model", "hrg", "--data", s(data), "--out", s(tmp.path())]);
    let text = std::fs::read_to_string(tmp.path().join("hrg_features.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 2 + 147);
    assert_eq!(lines.count(), 10 * 612);
}

#[test]
fn train_then_simulate() {
    let data = dataset();
    let tmp = TempDir::new().unwrap();
    let model = tmp.path().join("model.json");
    ok(&["train", "--model", "hr", "--subject", "s01", "--data", s(data), "--out", s(&model)]);
    let loaded = TrainedModel::load(&model).unwrap();
    assert_eq!(loaded.selected_names().len(), 20);

    let unknown = wearauth(&["train", "--model", "hr", "--subject", "nobody", "--data", s(data), "--out", s(&model)]);
    assert_eq!(unknown.status.code(), Some(2));

    let log = tmp.path().join("session.jsonl");
    let again = tmp.path().join("again.jsonl");
    for path in [&log, &again] {
        ok(&["simulate", "--subject", "s01", "--sessions", "8", "--data", s(data), "--out", s(path)]);
    }
    let text = std::fs::read_to_string(&log).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["route"].is_string() && v["estimated_latency_s"].is_number(), "{line}");
    }
}

fn burst(seed: u64) -> Vec<f64> {
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..22_050)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            0.3 * ((x >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        })
        .collect()
}

#[test]
fn augment_six_events() {
    let tmp = TempDir::new().unwrap();
    let events = tmp.path().join("events");
    std::fs::create_dir(&events).unwrap();
    for i in 0..6 {
        wearauth_core::ingest::write_wav(events.join(format!("event{i}.wav")), &burst(i), 22_050).unwrap();
    }
    let out = tmp.path().join("aug");
    ok(&["augment", "--events", s(&events), "--out", s(&out)]);
    let wavs = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "wav"))
        .count();
    assert_eq!(wavs, 612);
    assert_eq!(report_rows(&out.join("manifest.csv")), 612);

    let cfg = tmp.path().join("cfg.toml");
    std::fs::write(&cfg, "augment_noise = false\n").unwrap();
    let small = tmp.path().join("small");
    ok(&["--config", s(&cfg), "augment", "--events", s(&events), "--out", s(&small)]);
    assert_eq!(report_rows(&small.join("manifest.csv")), 6 * 22);
}
