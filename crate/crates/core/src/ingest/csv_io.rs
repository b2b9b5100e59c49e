use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{check_bpm, GaitSample, GaitSeries, HeartRateSample, HeartRateSeries, SubjectId};
use crate::error::{Error, Result};

const HR_HEADER: [&str; 2] = ["timestamp", "bpm"];
const GAIT_HEADER: [&str; 7] = ["timestamp", "ax", "ay", "az", "gx", "gy", "gz"];

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads every data row of a headed CSV file, checking the header and the
/// column count. Rows come back with their 1-based line numbers.
fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(parse_err(
            path,
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        ));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} columns, found {}", header.len(), record.len()),
            ));
        }
        let mut values = Vec::with_capacity(header.len());
        for (field, name) in record.iter().zip(header) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, line, format!("column `{name}`: `{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, format!("column `{name}` is not finite")));
            }
            values.push(v);
        }
        rows.push((line, values));
    }
    Ok(rows)
}

fn check_monotone(path: &Path, line: usize, prev: Option<f64>, t: f64) -> Result<()> {
    match prev {
        Some(p) if t <= p => Err(parse_err(
            path,
            line,
            format!("timestamp {t} does not increase (previous {p})"),
        )),
        _ => Ok(()),
    }
}

pub fn load_heart_rate(path: impl AsRef<Path>, subject: SubjectId) -> Result<HeartRateSeries> {
    let path = path.as_ref();
    let mut samples = Vec::new();
    let mut prev = None;
    for (line, v) in read_rows(path, &HR_HEADER)? {
        let (timestamp, bpm) = (v[0], v[1]);
        check_monotone(path, line, prev, timestamp)?;
        check_bpm(bpm).map_err(|m| parse_err(path, line, m))?;
        prev = Some(timestamp);
        samples.push(HeartRateSample { timestamp, bpm });
    }
    Ok(HeartRateSeries { subject, samples })
}

pub fn load_gait(path: impl AsRef<Path>, subject: SubjectId) -> Result<GaitSeries> {
    let path = path.as_ref();
    let mut samples = Vec::new();
    let mut prev = None;
    for (line, v) in read_rows(path, &GAIT_HEADER)? {
        check_monotone(path, line, prev, v[0])?;
        prev = Some(v[0]);
        let mut axes = [0.0; 6];
        axes.copy_from_slice(&v[1..]);
        samples.push(GaitSample {
            timestamp: v[0],
            axes,
        });
    }
    Ok(GaitSeries { subject, samples })
}

// Rust's `Display` for f64 prints the shortest string that parses back to the
// same value, so writing then loading is lossless.

pub fn write_heart_rate(path: impl AsRef<Path>, series: &HeartRateSeries) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = String::with_capacity(series.len() * 16 + 16);
    body.push_str(&HR_HEADER.join(","));
    body.push('\n');
    for s in &series.samples {
        body.push_str(&format!("{},{}\n", s.timestamp, s.bpm));
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_gait(path: impl AsRef<Path>, series: &GaitSeries) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = String::with_capacity(series.len() * 96 + 32);
    body.push_str(&GAIT_HEADER.join(","));
    body.push('\n');
    for s in &series.samples {
        let a = &s.axes;
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.timestamp, a[0], a[1], a[2], a[3], a[4], a[5]
        ));
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
