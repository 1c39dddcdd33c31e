//! Executes a validated config and produces the lines of its run record.

use pathsplit_core::chain::simulate_path;
use pathsplit_core::decomposition::{censored_sup_sample, exact_sup_sample, theorem2_sample, theorem3_sample, Phase};
use pathsplit_core::{Harmonic, Model, State};

use crate::config::{AnyModel, ExperimentConfig, Operation};
use crate::error::{RunError, RunResult};
use crate::parallel::replicate;
use crate::record::{Header, Line, PathLine, SplitLine, Summary, SupLine, SCHEMA_VERSION};
use crate::suites::run_suite;

/// Call `$body` with `$m` bound to the concrete model inside `$any`.
macro_rules! with_model {
    ($any:expr, $m:ident => $body:expr) => {
        match $any {
            AnyModel::Drifted($m) => $body,
            AnyModel::Lattice($m) => $body,
            AnyModel::Absorbed($m) => $body,
            AnyModel::Polya($m) => $body,
            AnyModel::Tree($m) => $body,
            AnyModel::Constant($m) => $body,
        }
    };
}

impl AnyModel {
    pub fn name(&self) -> String {
        with_model!(self, m => m.name().to_string())
    }

    /// Reject start states that do not decode or lie outside `{h > 0}`.
    pub fn check_start(&self, start: &str) -> RunResult<()> {
        with_model!(self, m => start_state(m, Some(start)).map(|_| ()))
    }
}

fn start_state<M: Model>(model: &M, start: Option<&str>) -> RunResult<M::State> {
    let Some(text) = start else {
        return Ok(model.origin());
    };
    let x = M::State::decode(text).map_err(|e| RunError::Config(format!("start state: {e}")))?;
    if !(model.harmonic().eval(&x) > 0.0) {
        return Err(RunError::Config(format!("start state {text} has h = 0")));
    }
    Ok(x)
}

fn encode<S: State>(path: &[S]) -> Vec<String> {
    path.iter().map(State::encode).collect()
}

fn labels(phases: &[Phase], hat: char, check: char) -> String {
    phases.iter().map(|p| if *p == Phase::Hat { hat } else { check }).collect()
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// A finished run: the record lines and whether every check passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub lines: Vec<Line>,
    pub pass: bool,
}

/// Run `config` on `workers` threads (0 = all cores). The output does not
/// depend on `workers`.
pub fn execute(config: &ExperimentConfig, workers: usize) -> RunResult<Outcome> {
    let model = config.validate()?;
    let op = config.operation()?.clone();
    let approximate = config.policy.is_truncated();
    // where the record goes is not part of the experiment
    let mut echo = config.clone();
    echo.output.path = None;
    let mut header = Header {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: echo,
        model: None,
        harmonic: None,
        detectability: None,
        approximate,
    };
    let body = match (&op, &model) {
        (Operation::Verify(suite), _) => run_suite(suite, config.seed, workers)?
            .into_iter()
            .map(Line::Test)
            .collect(),
        (_, Some(any)) => with_model!(any, m => {
            header.model = Some(m.name().to_string());
            header.harmonic = Some(m.harmonic().name().to_string());
            let class = if op == Operation::Dual { m.dual_detectability() } else { m.detectability() };
            header.detectability = Some(class.class.as_str().to_string());
            run_model(m, config, &op, workers)?
        }),
        (_, None) => unreachable!("validate returns a model for sampling operations"),
    };
    let summary = Summary::of(&op.to_string(), approximate, &body);
    let pass = summary.all_pass();
    let mut lines = Vec::with_capacity(body.len() + 2);
    lines.push(Line::Header(header));
    lines.extend(body);
    lines.push(Line::Summary(summary));
    Ok(Outcome { lines, pass })
}

fn run_model<M: Model>(model: &M, config: &ExperimentConfig, op: &Operation, workers: usize) -> RunResult<Vec<Line>> {
    let o = start_state(model, config.start.as_deref())?;
    let n = config.steps;
    let opts = config.sampler_options();
    let h = model.harmonic();
    let (seed, reps) = (config.seed.unwrap_or(0), config.replications);
    match op {
        Operation::Simulate => replicate(seed, reps, workers, |i, s| {
            let path = simulate_path(model.kernel(), &o, n, s)?.full();
            Ok(Line::Path(PathLine {
                replication: i,
                h: path.iter().map(|x| h.eval(x)).collect(),
                path: encode(&path),
            }))
        }),
        Operation::Decompose => replicate(seed, reps, workers, |i, s| {
            let d = theorem2_sample(model, &o, n, &opts, s)?;
            Ok(Line::Split(SplitLine {
                replication: i,
                level: d.level,
                t: d.t,
                tau_c: d.tau_c,
                split_value: d.t.and_then(|_| finite(d.split_value)),
                path: encode(&d.path),
                labels: labels(&d.labels, 'h', 'c'),
                approximate: d.approximate,
                detection_steps: d.detection_steps,
            }))
        }),
        Operation::Dual => replicate(seed, reps, workers, |i, s| {
            let d = theorem3_sample(model, &o, n, &opts, s)?;
            Ok(Line::Split(SplitLine {
                replication: i,
                level: d.level,
                t: d.t,
                tau_c: d.tau_c,
                split_value: d.t.map(|_| d.split_value),
                path: encode(&d.path),
                labels: labels(&d.labels, 'h', 'c'),
                approximate: d.approximate,
                detection_steps: d.detection_steps,
            }))
        }),
        Operation::SupSample => replicate(seed, reps, workers, |i, s| {
            Ok(Line::Sup(match config.censor {
                Some(c) => {
                    let d = censored_sup_sample(model, &o, c, opts.max_steps, s)?;
                    SupLine {
                        replication: i,
                        level: d.level,
                        value: d.value,
                        t: None,
                        tau_c: None,
                        censored: d.censored,
                        steps: d.steps,
                    }
                }
                None => {
                    let d = exact_sup_sample(model, &o, opts.max_steps, s)?;
                    SupLine {
                        replication: i,
                        level: d.level,
                        value: d.value,
                        t: Some(d.t),
                        tau_c: d.tau_c,
                        censored: false,
                        steps: d.tau_c.unwrap_or(d.t),
                    }
                }
            }))
        }),
        Operation::Verify(_) => unreachable!("verify runs registered suites"),
    }
}
