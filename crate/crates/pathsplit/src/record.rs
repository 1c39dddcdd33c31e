//! Run records: newline-delimited JSON, one object per line, tagged by
//! `kind`. A record is a `header`, then one line per replication (or per
//! test for `verify:<suite>`) in replication order, then a `summary`.
//! Nothing time-dependent is written, so identical configs give identical
//! bytes.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Format};
use crate::error::{RunError, RunResult};
use crate::verify::TestReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Line {
    Header(Header),
    Path(PathLine),
    Split(SplitLine),
    Sup(SupLine),
    Test(TestReport),
    Summary(Summary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema_version: u32,
    pub version: String,
    /// The effective config, after command-line overrides.
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detectability: Option<String>,
    /// Set for truncated-policy runs: samples are not exact draws.
    pub approximate: bool,
}

/// A `simulate` replication: `X_0..X_n` under `P` and `h` along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLine {
    pub replication: usize,
    pub path: Vec<String>,
    pub h: Vec<f64>,
}

/// A `decompose` or `dual` replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitLine {
    pub replication: usize,
    /// `Y` for decompose, `U` for dual.
    pub level: f64,
    /// Splitting index; `null` means `T = ∞`.
    pub t: Option<usize>,
    pub tau_c: Option<usize>,
    /// `h` at the splitting index; `null` when `T = ∞`.
    pub split_value: Option<f64>,
    pub path: Vec<String>,
    /// One letter per index: `h` for the transformed part, `c` for the
    /// conditioned or untransformed part.
    pub labels: String,
    pub approximate: bool,
    pub detection_steps: usize,
}

/// A `sup-sample` replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupLine {
    pub replication: usize,
    pub level: f64,
    /// `sup h`, or a lower bound at least the censor level when censored.
    pub value: f64,
    /// Index of the supremum; `null` when censored.
    pub t: Option<usize>,
    pub tau_c: Option<usize>,
    pub censored: bool,
    pub steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub operation: String,
    pub lines: usize,
    pub approximate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximate_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_infinite: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_c_median: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub censored: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<usize>,
}

/// Lower median of `values`, which is sorted in place.
pub fn median(values: &mut [usize]) -> Option<usize> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    Some(values[(values.len() - 1) / 2])
}

impl Summary {
    pub fn of(operation: &str, approximate: bool, lines: &[Line]) -> Self {
        let mut s = Summary {
            operation: operation.into(),
            approximate,
            ..Summary::default()
        };
        let mut ts = Vec::new();
        let mut taus = Vec::new();
        let (mut approx, mut infinite, mut censored) = (0, 0, 0);
        let (mut passed, mut failed, mut skipped) = (0, 0, 0);
        let (mut splits, mut sups, mut tests) = (false, false, false);
        for line in lines {
            match line {
                Line::Split(l) => {
                    splits = true;
                    approx += l.approximate as usize;
                    match l.t {
                        Some(t) => ts.push(t),
                        None => infinite += 1,
                    }
                    taus.extend(l.tau_c);
                }
                Line::Sup(l) => {
                    sups = true;
                    censored += l.censored as usize;
                    taus.extend(l.tau_c);
                }
                Line::Test(r) => {
                    tests = true;
                    if r.skipped {
                        skipped += 1;
                    } else if r.pass {
                        passed += 1;
                    } else {
                        failed += 1;
                    }
                }
                Line::Path(_) => {}
                Line::Header(_) | Line::Summary(_) => continue,
            }
            s.lines += 1;
        }
        if splits {
            s.approximate |= approx > 0;
            s.approximate_samples = Some(approx);
            s.t_infinite = Some(infinite);
            if !ts.is_empty() {
                s.t_mean = Some(ts.iter().sum::<usize>() as f64 / ts.len() as f64);
            }
        }
        if sups {
            s.censored = Some(censored);
        }
        if splits || sups {
            s.tau_c_median = median(&mut taus);
        }
        if tests {
            s.passed = Some(passed);
            s.failed = Some(failed);
            s.skipped = Some(skipped);
        }
        s
    }

    pub fn all_pass(&self) -> bool {
        self.failed.unwrap_or(0) == 0
    }
}

pub fn write_json<W: Write>(out: &mut W, lines: &[Line]) -> RunResult<()> {
    for line in lines {
        serde_json::to_writer(&mut *out, line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Per-sample CSV; header and summary are dropped. Paths and h-values are
/// space-separated within their cell, empty cells stand for `null`.
pub fn write_csv<W: Write>(out: W, lines: &[Line]) -> RunResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header_done = false;
    for line in lines {
        match line {
            Line::Path(l) => {
                if !header_done {
                    w.write_record(["replication", "path", "h"])?;
                }
                w.write_record([l.replication.to_string(), l.path.join(" "), join(&l.h)])?;
            }
            Line::Split(l) => {
                if !header_done {
                    w.write_record([
                        "replication",
                        "level",
                        "t",
                        "tau_c",
                        "split_value",
                        "path",
                        "labels",
                        "approximate",
                        "detection_steps",
                    ])?;
                }
                w.write_record([
                    l.replication.to_string(),
                    l.level.to_string(),
                    opt(l.t),
                    opt(l.tau_c),
                    opt(l.split_value),
                    l.path.join(" "),
                    l.labels.clone(),
                    l.approximate.to_string(),
                    l.detection_steps.to_string(),
                ])?;
            }
            Line::Sup(l) => {
                if !header_done {
                    w.write_record(["replication", "level", "value", "t", "tau_c", "censored", "steps"])?;
                }
                w.write_record([
                    l.replication.to_string(),
                    l.level.to_string(),
                    l.value.to_string(),
                    opt(l.t),
                    opt(l.tau_c),
                    l.censored.to_string(),
                    l.steps.to_string(),
                ])?;
            }
            Line::Test(r) => {
                if !header_done {
                    w.write_record(["name", "statistic", "value", "threshold", "p_value", "pass", "skipped", "seed", "detail"])?;
                }
                w.write_record([
                    r.name.clone(),
                    r.statistic.clone(),
                    r.value.to_string(),
                    r.threshold.to_string(),
                    opt(r.p_value),
                    r.pass.to_string(),
                    r.skipped.to_string(),
                    opt(r.seed),
                    r.detail.clone(),
                ])?;
            }
            Line::Header(_) | Line::Summary(_) => continue,
        }
        header_done = true;
    }
    w.flush()?;
    Ok(())
}

pub fn write<W: Write>(out: &mut W, lines: &[Line], format: Format) -> RunResult<()> {
    match format {
        Format::Json => write_json(out, lines),
        Format::Csv => write_csv(out, lines),
    }
}

/// Read a JSON run record, checking that it starts with a header of the
/// current schema version.
pub fn read<R: BufRead>(input: R, name: &str) -> RunResult<(Header, Vec<Line>)> {
    let mut header = None;
    let mut lines = Vec::new();
    for (i, text) in input.lines().enumerate() {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| RunError::Config(format!("{name}: line 1 is not a run record header: {e}")))?;
            let version = value.get("schema_version").and_then(|v| v.as_u64());
            if value.get("kind").and_then(|k| k.as_str()) != Some("header") {
                return Err(RunError::Config(format!("{name}: line 1 is not a run record header")));
            }
            if version != Some(SCHEMA_VERSION as u64) {
                return Err(RunError::Config(format!(
                    "{name}: schema version {} does not match {SCHEMA_VERSION}",
                    version.map_or("missing".to_string(), |v| v.to_string())
                )));
            }
            match serde_json::from_value(value) {
                Ok(Line::Header(h)) => header = Some(h),
                Ok(_) => unreachable!("kind checked above"),
                Err(e) => return Err(RunError::Config(format!("{name}: bad header: {e}"))),
            }
            continue;
        }
        let line: Line = serde_json::from_str(&text)
            .map_err(|e| RunError::Config(format!("{name}: line {}: {e}", i + 1)))?;
        lines.push(line);
    }
    let header = header.ok_or_else(|| RunError::Config(format!("{name}: empty run record")))?;
    Ok((header, lines))
}
