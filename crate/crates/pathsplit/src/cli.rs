//! Command-line front end. Exit codes: 0 success, 1 verification failure
//! or runtime error, 2 invalid config or invocation. Errors go to stderr as
//! one JSON object with a stable `reason` tag.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, Format, Operation};
use crate::error::{RunError, RunResult};
use crate::record::{self, Line};
use crate::report::{Aggregate, ReportKind};
use crate::runner::execute;

#[derive(Debug, Parser)]
#[command(name = "pathsplit", version, about = "Path decompositions of Markov chains at the extrema of a harmonic function")]
pub struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// json (newline-delimited records) or csv.
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    pub format: Option<String>,
    /// Worker threads, 0 for all cores. Does not change the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the P-chain.
    Simulate,
    /// Sample by the max-decomposition.
    Decompose,
    /// Sample by the dual (min) decomposition.
    Dual,
    /// Exact draws of sup h along a P-chain.
    SupSample,
    /// Run a verification suite (or `all`).
    Verify { suite: String },
    /// Aggregate run records into CSV.
    Report {
        /// summary or histogram-data.
        #[arg(long, default_value = "summary")]
        kind: String,
        inputs: Vec<PathBuf>,
    },
    /// Run whatever operation the config names.
    Run,
}

fn subcommand_operation(command: &Command) -> RunResult<Option<Operation>> {
    Ok(match command {
        Command::Simulate => Some(Operation::Simulate),
        Command::Decompose => Some(Operation::Decompose),
        Command::Dual => Some(Operation::Dual),
        Command::SupSample => Some(Operation::SupSample),
        Command::Verify { suite } => Some(format!("verify:{suite}").parse()?),
        Command::Run | Command::Report { .. } => None,
    })
}

/// The config after command-line overrides.
pub fn effective_config(cli: &Cli) -> RunResult<ExperimentConfig> {
    let op = subcommand_operation(&cli.command)?;
    let mut config = match (&cli.config, &op) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(Operation::Verify(_))) => ExperimentConfig::from_json("{}")?,
        (None, _) => return Err(RunError::Config("--config is required for this subcommand".into())),
    };
    if let Some(op) = op {
        match &config.operation {
            Some(existing) if *existing != op => {
                return Err(RunError::Config(format!(
                    "config names operation {existing} but the subcommand asks for {op}"
                )))
            }
            _ => config.operation = Some(op),
        }
    }
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if cli.out.is_some() {
        config.output.path = cli.out.clone();
    }
    if let Some(f) = &cli.format {
        config.output.format = f.parse()?;
    }
    Ok(config)
}

fn open_output(path: &Option<PathBuf>) -> RunResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: &Cli) -> RunResult<bool> {
    if let Command::Report { kind, inputs } = &cli.command {
        let kind: ReportKind = kind.parse()?;
        if cli.format.as_deref() == Some("json") {
            return Err(RunError::Config("reports are CSV only".into()));
        }
        let agg = Aggregate::from_files(inputs)?;
        if agg.approximate {
            eprintln!("warning: aggregating truncated-policy (approximate) samples");
        }
        let mut out = open_output(&cli.out)?;
        agg.write(kind, &mut out)?;
        out.flush()?;
        return Ok(true);
    }
    let config = effective_config(cli)?;
    let started = Instant::now();
    let outcome = execute(&config, cli.workers)?;
    let mut out = open_output(&config.output.path)?;
    record::write(&mut out, &outcome.lines, config.output.format)?;
    out.flush()?;
    drop(out);
    for line in &outcome.lines {
        match line {
            Line::Test(r) => eprintln!("{}", r.line()),
            Line::Summary(s) if s.approximate => {
                eprintln!("warning: truncated policy, samples are approximate")
            }
            _ => {}
        }
    }
    eprintln!("wall-clock: {:.3} s", started.elapsed().as_secs_f64());
    if config.output.format == Format::Csv && matches!(config.operation, Some(Operation::Verify(_))) {
        eprintln!("note: csv output carries the test rows only");
    }
    Ok(outcome.pass)
}

fn error_json(e: &RunError) -> String {
    serde_json::json!({
        "reason": e.reason(),
        "exit_code": e.exit_code(),
        "message": e.to_string(),
    })
    .to_string()
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("{}", error_json(&RunError::Verification("one or more checks failed".into())));
            1
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("pathsplit").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn verify_needs_no_config() {
        let c = effective_config(&parse(&["verify", "mixture", "--seed", "3"])).unwrap();
        assert_eq!(c.operation, Some(Operation::Verify("mixture".into())));
        assert_eq!(c.seed, Some(3));
    }

    #[test]
    fn sampling_needs_config() {
        let e = effective_config(&parse(&["decompose"])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unknown_suite_exits_two() {
        assert_eq!(main_with(["pathsplit", "verify", "nope"]), 2);
    }

    #[test]
    fn bad_flag_exits_two() {
        assert_eq!(main_with(["pathsplit", "--format", "xml", "simulate"]), 2);
    }
}
