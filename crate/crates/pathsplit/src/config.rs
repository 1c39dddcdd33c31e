//! Experiment configuration: a JSON document naming a model, an operation
//! and the sampling parameters. Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pathsplit_core::models::{
    AbsorbedWalk, Boundary, ConstantModel, DriftedWalk, LatticeWalk, PolyaUrn, PolyaVariant,
    TreeWalk, WalkKernel,
};
use pathsplit_core::{Policy, SamplerOptions};
use serde::{Deserialize, Serialize};

use crate::error::{RunError, RunResult};
use crate::suites::SUITES;

/// Default safety cap on detection runs.
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Required for every operation except `verify:<suite>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    /// May be left out when the CLI subcommand names the operation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<Operation>,
    /// Encoded start state; the model's origin if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(default)]
    pub steps: usize,
    #[serde(default = "one")]
    pub replications: usize,
    /// Master seed; 0 if absent. Verify suites use their registered seeds
    /// unless one is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub policy: PolicySpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Sup-sample only: stop once a record reaches this h-level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub censor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    DriftedWalk(DriftedParams),
    LatticeWalk(LatticeParams),
    AbsorbedWalk,
    PolyaUrn(PolyaParams),
    TreeWalk(TreeParams),
    ConstantH(DriftedParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftedParams {
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Increment {
    pub step: Vec<i64>,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    pub increments: Vec<Increment>,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UrnHarmonic {
    /// `h_p`, needs `p`.
    Bernoulli,
    /// `h = r/t`.
    Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyaParams {
    pub harmonic: UrnHarmonic,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeParams {
    pub r: u8,
    /// Prefix of the boundary point ω as letters; continued periodically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<u8>>,
    /// Draw a pseudo-random boundary prefix instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_seed: Option<u64>,
}

/// Length of the prefix drawn for `boundary_seed`.
pub const SEEDED_BOUNDARY_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operation {
    Simulate,
    Decompose,
    Dual,
    SupSample,
    Verify(String),
}

impl Operation {
    pub fn needs_model(&self) -> bool {
        !matches!(self, Operation::Verify(_))
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Simulate => f.write_str("simulate"),
            Operation::Decompose => f.write_str("decompose"),
            Operation::Dual => f.write_str("dual"),
            Operation::SupSample => f.write_str("sup-sample"),
            Operation::Verify(s) => write!(f, "verify:{s}"),
        }
    }
}

impl FromStr for Operation {
    type Err = RunError;

    fn from_str(s: &str) -> RunResult<Self> {
        Ok(match s {
            "simulate" => Operation::Simulate,
            "decompose" => Operation::Decompose,
            "dual" => Operation::Dual,
            "sup-sample" => Operation::SupSample,
            _ => match s.strip_prefix("verify:") {
                Some(suite) if suite == "all" || SUITES.contains(&suite) => Operation::Verify(suite.into()),
                Some(suite) => {
                    return Err(RunError::Config(format!(
                        "unknown suite '{suite}'; expected one of {} or all",
                        SUITES.join(", ")
                    )))
                }
                None => {
                    return Err(RunError::Config(format!(
                        "unknown operation '{s}'; expected simulate, decompose, dual, sup-sample or verify:<suite>"
                    )))
                }
            },
        })
    }
}

impl Serialize for Operation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Operation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    #[default]
    Exact,
    Truncated { horizon: usize },
}

impl PolicySpec {
    pub fn is_truncated(self) -> bool {
        matches!(self, PolicySpec::Truncated { .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = RunError;

    fn from_str(s: &str) -> RunResult<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(RunError::Config(format!("unknown format '{s}'; expected json or csv"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Standard output if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// A validated model, ready to run.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Drifted(DriftedWalk),
    Lattice(LatticeWalk),
    Absorbed(AbsorbedWalk),
    Polya(PolyaUrn),
    Tree(TreeWalk),
    Constant(ConstantModel<WalkKernel>),
}

fn invalid(e: impl fmt::Display) -> RunError {
    RunError::Config(e.to_string())
}

impl ModelSpec {
    pub fn build(&self) -> RunResult<AnyModel> {
        Ok(match self {
            ModelSpec::DriftedWalk(p) => AnyModel::Drifted(DriftedWalk::new(p.p).map_err(invalid)?),
            ModelSpec::LatticeWalk(p) => {
                let incs = p.increments.iter().map(|i| (i.step.clone(), i.prob)).collect();
                AnyModel::Lattice(LatticeWalk::new(incs, p.direction.clone()).map_err(invalid)?)
            }
            ModelSpec::AbsorbedWalk => AnyModel::Absorbed(AbsorbedWalk::new()),
            ModelSpec::PolyaUrn(p) => {
                let variant = match (p.harmonic, p.p) {
                    (UrnHarmonic::Bernoulli, Some(p)) => PolyaVariant::Bernoulli { p },
                    (UrnHarmonic::Bernoulli, None) => {
                        return Err(RunError::Config("polya-urn with harmonic bernoulli needs p".into()))
                    }
                    (UrnHarmonic::Ratio, None) => PolyaVariant::Ratio,
                    (UrnHarmonic::Ratio, Some(_)) => {
                        return Err(RunError::Config("polya-urn with harmonic ratio takes no p".into()))
                    }
                };
                AnyModel::Polya(PolyaUrn::new(variant).map_err(invalid)?)
            }
            ModelSpec::TreeWalk(p) => {
                if p.r < 3 {
                    return Err(RunError::Config(format!("tree-walk needs r ≥ 3, got {}", p.r)));
                }
                let walk = match (&p.boundary, p.boundary_seed) {
                    (Some(_), Some(_)) => {
                        return Err(RunError::Config("tree-walk takes boundary or boundary_seed, not both".into()))
                    }
                    (Some(letters), None) => TreeWalk::new(Boundary::from_prefix(p.r, letters.clone()).map_err(invalid)?),
                    (None, Some(seed)) => TreeWalk::new(Boundary::seeded(p.r, seed, SEEDED_BOUNDARY_LEN)),
                    (None, None) => TreeWalk::standard(p.r),
                };
                AnyModel::Tree(walk.map_err(invalid)?)
            }
            ModelSpec::ConstantH(p) => AnyModel::Constant(ConstantModel::walk(p.p).map_err(invalid)?),
        })
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> RunResult<Self> {
        serde_json::from_str(text).map_err(|e| RunError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The operation, which must be set by now.
    pub fn operation(&self) -> RunResult<&Operation> {
        self.operation
            .as_ref()
            .ok_or_else(|| RunError::Config("no operation given in the config or on the command line".into()))
    }

    /// Check everything that can be checked without running; returns the
    /// model when the operation needs one.
    pub fn validate(&self) -> RunResult<Option<AnyModel>> {
        let op = self.operation()?;
        if let PolicySpec::Truncated { horizon: 0 } = self.policy {
            return Err(RunError::Config("truncated policy needs horizon ≥ 1".into()));
        }
        if self.max_steps == Some(0) {
            return Err(RunError::Config("max_steps must be ≥ 1".into()));
        }
        if let Some(c) = self.censor {
            if !(c.is_finite() && c > 0.0) {
                return Err(RunError::Config(format!("censor must be a positive finite level, got {c}")));
            }
            if *op != Operation::SupSample {
                return Err(RunError::Config("censor only applies to sup-sample".into()));
            }
        }
        if !op.needs_model() {
            if self.model.is_some() || self.start.is_some() {
                return Err(RunError::Config(format!(
                    "{op} runs registered models; drop model and start from the config"
                )));
            }
            return Ok(None);
        }
        if self.replications == 0 {
            return Err(RunError::Config("replications must be ≥ 1".into()));
        }
        let spec = self
            .model
            .as_ref()
            .ok_or_else(|| RunError::Config(format!("{op} needs a model")))?;
        let model = spec.build()?;
        if let Some(start) = &self.start {
            model.check_start(start)?;
        }
        Ok(Some(model))
    }

    pub fn sampler_options(&self) -> SamplerOptions {
        let max_steps = self.max_steps.unwrap_or(DEFAULT_MAX_STEPS);
        let policy = match self.policy {
            PolicySpec::Exact => Policy::Exact,
            PolicySpec::Truncated { horizon } => Policy::Truncated { horizon },
        };
        SamplerOptions {
            policy,
            max_steps,
            ..SamplerOptions::default()
        }
    }
}
