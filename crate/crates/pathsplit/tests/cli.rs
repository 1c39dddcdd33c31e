use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pathsplit::config::ExperimentConfig;
use pathsplit::record::{self, Line};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pathsplit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn error_of(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("json error on stderr");
    serde_json::from_str(line).unwrap()
}

const SUP: &str = r#"{"model": {"name": "drifted-walk", "params": {"p": 0.3333333333333333}},
                      "operation": "sup-sample", "replications": 4000, "seed": 9}"#;

#[test]
fn malformed_parameter_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"model": {"name": "drifted-walk", "params": {"p": 1.5}}, "steps": 3}"#);
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_of(&out);
    assert_eq!(e["reason"], "config");
    assert!(e["message"].as_str().unwrap().contains("1.5"));
}

#[test]
fn unknown_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"model": {"name": "absorbed-walk"}, "stepz": 3}"#);
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_of(&out)["message"].as_str().unwrap().contains("stepz"));
}

#[test]
fn operation_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SUP);
    assert_eq!(run(&["decompose", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_split_identities_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("v.ndjson");
    let out = run(&["verify", "split-identities", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().any(|l| l.starts_with("PASS split-identity/")));
    let (_, lines) = record::read(std::fs::File::open(&out_path).map(std::io::BufReader::new).unwrap(), "v").unwrap();
    let Some(Line::Summary(s)) = lines.last() else { panic!() };
    assert_eq!(s.failed, Some(0));
    assert!(s.passed.unwrap() >= 3);
}

#[test]
fn undetectable_exact_decompose_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "u.json", r#"{"model": {"name": "polya-urn", "params": {"harmonic": "ratio"}}, "steps": 3}"#);
    let out = run(&["decompose", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["reason"], "unsupported");
}

#[test]
fn record_header_round_trips_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SUP);
    let out = run(&["sup-sample", "--config", cfg.to_str().unwrap(), "--seed", "12"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let (header, lines) = record::read(text.as_bytes(), "stdout").unwrap();
    assert_eq!(header.config.seed, Some(12));
    assert_eq!(lines.len(), 4001);
    let echoed = serde_json::to_string(&header.config).unwrap();
    let again = ExperimentConfig::from_json(&echoed).unwrap();
    assert!(again.validate().is_ok());
    assert_eq!(again, header.config);
}

#[test]
fn csv_output_has_a_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"model": {"name": "tree-walk", "params": {"r": 3}}, "steps": 5, "replications": 50, "seed": 1}"#,
    );
    let out = run(&["decompose", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(&out.stdout[..]);
    assert_eq!(reader.headers().unwrap().iter().next(), Some("replication"));
    assert_eq!(reader.records().count(), 50);
}

#[test]
fn report_sup_ccdf_and_merging() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SUP);
    let a = dir.path().join("a.ndjson");
    let b = dir.path().join("b.ndjson");
    for (path, seed) in [(&a, "1"), (&b, "2")] {
        let out = run(&["sup-sample", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let hist = |inputs: &[&PathBuf]| -> Vec<(String, String, u64, f64)> {
        let mut args = vec!["report", "--kind", "histogram-data"];
        args.extend(inputs.iter().map(|p| p.to_str().unwrap()));
        let out = run(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        csv::Reader::from_reader(&out.stdout[..])
            .deserialize()
            .map(|r| r.unwrap())
            .collect()
    };
    let ha = hist(&[&a]);
    let hb = hist(&[&b]);
    let hab = hist(&[&a, &b]);
    // P(sup ≥ 2^k) = 2^{−k}
    for (series, x, count, value) in &hab {
        if series == "sup_ccdf" {
            let k = x.parse::<f64>().unwrap().log2().round() as i32;
            let p = 0.5f64.powi(k);
            assert!((value - p).abs() < 4.0 * (p * (1.0 - p) / 8000.0).sqrt() + 1e-12, "λ = {x}: {value} vs {p}");
            let ca = ha.iter().find(|r| r.0 == *series && r.1 == *x).map_or(0, |r| r.2);
            let cb = hb.iter().find(|r| r.0 == *series && r.1 == *x).map_or(0, |r| r.2);
            assert_eq!(*count, ca + cb, "counts add at λ = {x}");
        }
    }
    assert!(hab.iter().any(|r| r.0 == "t_histogram"));
    assert!(hab.iter().any(|r| r.0 == "tau_c_quantile"));

    let out = run(&["report", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("samples,8000"));
    assert!(summary.contains("inputs,2"));
}

#[test]
fn report_errors_exit_two() {
    assert_eq!(run(&["report"]).status.code(), Some(2));
    assert_eq!(run(&["report", "--kind", "pie"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let old = write(
        dir.path(),
        "old.ndjson",
        "{\"kind\":\"header\",\"schema_version\":0,\"version\":\"0.0.0\",\"config\":{},\"approximate\":false}\n",
    );
    let out = run(&["report", old.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_of(&out)["message"].as_str().unwrap().contains("schema version"));
}

#[test]
fn truncated_runs_are_flagged_in_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "u.json",
        r#"{"model": {"name": "polya-urn", "params": {"harmonic": "ratio"}}, "steps": 2, "replications": 20,
            "policy": {"truncated": {"horizon": 30}}}"#,
    );
    let rec = dir.path().join("u.ndjson");
    let out = run(&["decompose", "--config", cfg.to_str().unwrap(), "--out", rec.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("approximate"));
    let out = run(&["report", rec.to_str().unwrap()]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("approximate,true"));
}
