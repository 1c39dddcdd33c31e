//! Aggregates over one or more run records, written as CSV.
//!
//! `summary` is a two-column `statistic,value` table. `histogram-data` is a
//! long table `series,x,count,value` with the series
//!
//! * `t_histogram`: `x` = splitting index (`inf` for `T = ∞`), `count`
//!   runs, `value` their fraction;
//! * `sup_ccdf` (decompose, sup-sample): `x` = λ, `count` runs with
//!   `sup h ≥ λ`, `value` their fraction; for censored runs only λ up to
//!   the censor level is reported;
//! * `inf_cdf` (dual): `x` = λ, `count` runs with `inf h ≤ λ`;
//! * `tau_c_quantile`: `x` = probability, `count` observed crossings,
//!   `value` the nearest-rank quantile of `τ_c`.

use std::collections::BTreeMap;
use std::io::{BufReader, Write};
use std::path::Path;

use crate::config::Operation;
use crate::error::{RunError, RunResult};
use crate::record::{read, Line};

pub const QUANTILES: [f64; 6] = [0.1, 0.25, 0.5, 0.75, 0.9, 0.99];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Summary,
    HistogramData,
}

impl std::str::FromStr for ReportKind {
    type Err = RunError;

    fn from_str(s: &str) -> RunResult<Self> {
        match s {
            "summary" => Ok(ReportKind::Summary),
            "histogram-data" => Ok(ReportKind::HistogramData),
            _ => Err(RunError::Config(format!("unknown report kind '{s}'; expected summary or histogram-data"))),
        }
    }
}

/// Merged counts over every input. All fields add across inputs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Aggregate {
    pub inputs: usize,
    pub operation: String,
    pub approximate: bool,
    pub samples: usize,
    pub approximate_samples: usize,
    /// `None` key is `T = ∞`.
    pub t: BTreeMap<Option<usize>, u64>,
    pub tau_c: Vec<usize>,
    /// Extremal h-value per run (sup for decompose/sup-sample, inf for dual).
    pub extreme: Vec<f64>,
    pub censored: usize,
    /// Smallest censor level across inputs.
    pub censor: Option<f64>,
    pub tests: [usize; 3],
}

impl Aggregate {
    pub fn from_files<P: AsRef<Path>>(paths: &[P]) -> RunResult<Self> {
        if paths.is_empty() {
            return Err(RunError::Config("report needs at least one run record".into()));
        }
        let mut agg = Aggregate::default();
        for path in paths {
            let path = path.as_ref();
            let name = path.display().to_string();
            let file = std::fs::File::open(path).map_err(|e| RunError::Config(format!("cannot open {name}: {e}")))?;
            let (header, lines) = read(BufReader::new(file), &name)?;
            let op = header.config.operation()?.to_string();
            if agg.inputs == 0 {
                agg.operation = op;
            } else if agg.operation != op {
                return Err(RunError::Config(format!(
                    "{name}: operation {op} does not match {} of earlier inputs",
                    agg.operation
                )));
            }
            agg.inputs += 1;
            agg.approximate |= header.approximate;
            if let Some(c) = header.config.censor {
                agg.censor = Some(agg.censor.map_or(c, |a: f64| a.min(c)));
            }
            agg.add(&lines);
        }
        Ok(agg)
    }

    pub fn add(&mut self, lines: &[Line]) {
        let dual = self.operation == Operation::Dual.to_string();
        for line in lines {
            match line {
                Line::Path(_) => self.samples += 1,
                Line::Split(l) => {
                    self.samples += 1;
                    self.approximate_samples += l.approximate as usize;
                    *self.t.entry(l.t).or_insert(0) += 1;
                    self.tau_c.extend(l.tau_c);
                    match l.split_value {
                        Some(v) => self.extreme.push(v),
                        None if dual => self.extreme.push(0.0),
                        None => {}
                    }
                }
                Line::Sup(l) => {
                    self.samples += 1;
                    self.censored += l.censored as usize;
                    if let Some(t) = l.t {
                        *self.t.entry(Some(t)).or_insert(0) += 1;
                    }
                    self.tau_c.extend(l.tau_c);
                    self.extreme.push(l.value);
                }
                Line::Test(r) => {
                    let slot = if r.skipped { 2 } else if r.pass { 0 } else { 1 };
                    self.tests[slot] += 1;
                }
                Line::Header(_) | Line::Summary(_) => {}
            }
        }
        self.approximate |= self.approximate_samples > 0;
    }

    /// Nearest-rank quantiles of `τ_c`.
    pub fn tau_c_quantiles(&self) -> Vec<(f64, usize)> {
        let mut v = self.tau_c.clone();
        v.sort_unstable();
        if v.is_empty() {
            return Vec::new();
        }
        QUANTILES
            .iter()
            .map(|&q| {
                let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
                (q, v[rank - 1])
            })
            .collect()
    }

    fn levels(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self.extreme.iter().copied().filter(|v| v.is_finite()).collect();
        if let Some(c) = self.censor {
            xs.retain(|&v| v < c);
            if self.censored > 0 {
                xs.push(c);
            }
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }

    /// `(λ, #{runs with sup ≥ λ})` over the observed levels.
    pub fn sup_ccdf(&self) -> Vec<(f64, usize)> {
        self.levels()
            .into_iter()
            .map(|l| (l, self.extreme.iter().filter(|&&v| v >= l).count()))
            .collect()
    }

    /// `(λ, #{runs with inf ≤ λ})` over the observed levels.
    pub fn inf_cdf(&self) -> Vec<(f64, usize)> {
        self.levels()
            .into_iter()
            .map(|l| (l, self.extreme.iter().filter(|&&v| v <= l).count()))
            .collect()
    }

    fn runs(&self) -> usize {
        self.extreme.len().max(1)
    }

    pub fn write_summary<W: Write>(&self, out: W) -> RunResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["statistic", "value"])?;
        let mut row = |k: &str, v: String| w.write_record([k, v.as_str()]);
        row("inputs", self.inputs.to_string())?;
        row("operation", self.operation.clone())?;
        row("approximate", self.approximate.to_string())?;
        row("samples", self.samples.to_string())?;
        row("approximate_samples", self.approximate_samples.to_string())?;
        if !self.t.is_empty() {
            let finite: Vec<(usize, u64)> = self.t.iter().filter_map(|(t, c)| t.map(|t| (t, *c))).collect();
            let n: u64 = finite.iter().map(|(_, c)| c).sum();
            row("t_finite", n.to_string())?;
            row("t_infinite", self.t.get(&None).copied().unwrap_or(0).to_string())?;
            if n > 0 {
                let mean = finite.iter().map(|(t, c)| *t as f64 * *c as f64).sum::<f64>() / n as f64;
                row("t_mean", mean.to_string())?;
            }
        }
        if !self.extreme.is_empty() {
            row("censored", self.censored.to_string())?;
        }
        row("tau_c_observed", self.tau_c.len().to_string())?;
        for (q, v) in self.tau_c_quantiles() {
            row(&format!("tau_c_q{q}"), v.to_string())?;
        }
        if self.tests.iter().sum::<usize>() > 0 {
            row("tests_passed", self.tests[0].to_string())?;
            row("tests_failed", self.tests[1].to_string())?;
            row("tests_skipped", self.tests[2].to_string())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_histograms<W: Write>(&self, out: W) -> RunResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["series", "x", "count", "value"])?;
        let t_total: u64 = self.t.values().sum();
        for (t, c) in &self.t {
            let x = t.map_or("inf".to_string(), |t| t.to_string());
            w.write_record(["t_histogram", &x, &c.to_string(), &(*c as f64 / t_total as f64).to_string()])?;
        }
        let runs = self.runs() as f64;
        let dual = self.operation == Operation::Dual.to_string();
        let (series, rows) = if dual { ("inf_cdf", self.inf_cdf()) } else { ("sup_ccdf", self.sup_ccdf()) };
        for (l, c) in rows {
            w.write_record([series, &l.to_string(), &c.to_string(), &(c as f64 / runs).to_string()])?;
        }
        let observed = self.tau_c.len().to_string();
        for (q, v) in self.tau_c_quantiles() {
            w.write_record(["tau_c_quantile", &q.to_string(), &observed, &v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write<W: Write>(&self, kind: ReportKind, out: W) -> RunResult<()> {
        match kind {
            ReportKind::Summary => self.write_summary(out),
            ReportKind::HistogramData => self.write_histograms(out),
        }
    }
}
