//! Report files: per-fold CSV, aggregate table, curve CSV and SVG charts.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{Aggregate, CurvePoint, MetricReport};
use crate::pipeline::{FoldReport, ScoredRow};

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_fold_reports(path: impl AsRef<Path>, reports: &[FoldReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(Error::from)?;
    let mut header = vec!["subject", "fold", "model", "classifier", "hyperparameters"];
    header.extend(MetricReport::NAMES);
    w.write_record(&header)?;
    for r in reports {
        let mut rec = vec![
            r.subject.to_string(),
            r.fold.to_string(),
            r.model.as_str().to_string(),
            r.classifier.to_string(),
            r.hyperparameters.to_string(),
        ];
        rec.extend(r.metrics.values().iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

pub fn write_scores(path: impl AsRef<Path>, subjects: &[String], scores: &[ScoredRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(Error::from)?;
    w.write_record(["subject", "fold", "valid", "confidence"])?;
    for s in scores {
        w.write_record([
            subjects[s.subject].clone(),
            s.fold.to_string(),
            u8::from(s.valid).to_string(),
            s.confidence.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

/// Reads `valid,confidence` pairs back from a scores file.
pub fn read_scores(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<bool>)> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(Error::from)?;
    let (mut conf, mut valid) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |m: &str| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: m.to_string(),
        };
        valid.push(match rec.get(2) {
            Some("1") => true,
            Some("0") => false,
            _ => return Err(bad("valid must be 0 or 1")),
        });
        conf.push(
            rec.get(3)
                .and_then(|c| c.parse::<f64>().ok())
                .ok_or_else(|| bad("confidence is not a number"))?,
        );
    }
    Ok((conf, valid))
}

pub fn write_curve(path: impl AsRef<Path>, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(Error::from)?;
    w.write_record(["threshold", "far", "frr"])?;
    for p in curve {
        w.write_record([format!("{:.2}", p.threshold), p.far.to_string(), p.frr.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

/// One row per (label, aggregate): `mean ± std` of every metric.
pub fn aggregate_table(rows: &[(String, Aggregate)]) -> String {
    let mut out = String::from("| Classifier |");
    for n in MetricReport::NAMES {
        let _ = write!(out, " {n} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(MetricReport::NAMES.len()));
    out.push('\n');
    for (label, agg) in rows {
        let _ = write!(out, "| {label} |");
        for m in &agg.metrics {
            let _ = write!(out, " {:.2} ± {:.2} |", m.mean, m.std);
        }
        out.push('\n');
    }
    out
}

pub fn write_aggregate_table(path: impl AsRef<Path>, rows: &[(String, Aggregate)]) -> Result<()> {
    write_text(path.as_ref(), &aggregate_table(rows))
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

fn x_of(t: f64) -> f64 {
    PAD + t * (W - 2.0 * PAD)
}

fn y_of(v: f64) -> f64 {
    H - PAD - v * (H - 2.0 * PAD)
}

fn frame(title: &str) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    );
    for i in 0..=10 {
        let v = i as f64 / 10.0;
        let _ = writeln!(
            s,
            "<line x1=\"{PAD}\" x2=\"{}\" y1=\"{y:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/><text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{v:.1}</text>",
            W - PAD,
            PAD - 6.0,
            y_of(v) + 4.0,
            y = y_of(v)
        );
    }
    s
}

/// FAR and FRR against the confidence threshold.
pub fn curve_svg(curve: &[CurvePoint], title: &str) -> String {
    let mut s = frame(title);
    for (name, color, pick) in [
        ("FAR", "#d62728", (|p: &CurvePoint| p.far) as fn(&CurvePoint) -> f64),
        ("FRR", "#1f77b4", |p: &CurvePoint| p.frr),
    ] {
        let pts: Vec<String> = curve
            .iter()
            .map(|p| format!("{:.1},{:.1}", x_of(p.threshold), y_of(pick(p))))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            pts.join(" ")
        );
        let ly = if name == "FAR" { 40.0 } else { 56.0 };
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{ly}\" fill=\"{color}\">{name}</text>",
            W - PAD - 40.0
        );
    }
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{t:.1}</text>",
            x_of(t),
            H - PAD + 16.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">confidence threshold</text>\n</svg>",
        W / 2.0,
        H - 10.0
    );
    s
}

/// Box plot (min, quartiles, max) of every metric.
pub fn box_svg(agg: &Aggregate, title: &str) -> String {
    let mut s = frame(title);
    let n = agg.metrics.len() as f64;
    let slot = (W - 2.0 * PAD) / n;
    for (i, m) in agg.metrics.iter().enumerate() {
        let cx = PAD + slot * (i as f64 + 0.5);
        let half = slot * 0.25;
        let _ = writeln!(
            s,
            "<line x1=\"{cx:.1}\" x2=\"{cx:.1}\" y1=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
             <rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#9ecae1\" stroke=\"black\"/>\n\
             <line x1=\"{:.1}\" x2=\"{:.1}\" y1=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\" stroke-width=\"2\"/>\n\
             <text x=\"{cx:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            y_of(m.min),
            y_of(m.max),
            cx - half,
            y_of(m.q3),
            2.0 * half,
            y_of(m.q1) - y_of(m.q3),
            cx - half,
            cx + half,
            y_of(m.median),
            y_of(m.median),
            H - PAD + 16.0,
            m.name
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(path: impl AsRef<Path>, svg: &str) -> Result<()> {
    write_text(path.as_ref(), svg)
}
