//! The acceptance suite. Runs every criterion, prints one PASS/FAIL line
//! each, and exits non-zero if any failed.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use pathsplit::config::ExperimentConfig;
use pathsplit::record;
use pathsplit::runner::execute;
use pathsplit::suites;
use pathsplit::verify::{
    all_pass, check_sup_sample, chi2_against_law, constructed_split_law, count, direct_split_law, split_identity_errors,
    SplitIndex, TestReport, EXACT_TOL,
};
use pathsplit_core::decomposition::{theorem2_sample, theorem3_sample};
use pathsplit_core::models::{
    boundary_mixture_check, tree_q_star_tilde_exact, tree_q_tilde_exact, AbsorbedWalk, DriftedWalk, TreeWalk, Word,
};
use pathsplit_core::{Harmonic, Model, SamplerOptions, State};
use pathsplit::parallel::replicate;

type Outcome = Result<String, String>;

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn reports_pass(reports: &[TestReport]) -> Outcome {
    let failed: Vec<String> = reports.iter().filter(|r| !(r.pass || r.skipped)).map(|r| r.line()).collect();
    ensure(all_pass(reports) && !reports.is_empty(), || format!("{} failing: {}", failed.len(), failed.join(" | ")))?;
    let skipped = reports.iter().filter(|r| r.skipped).count();
    Ok(format!("{} checks pass, {skipped} skipped", reports.len() - skipped))
}

fn timed(limit: Duration, what: &str, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let detail = f()?;
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))?;
    Ok(format!("{detail}; {took:.2?}"))
}

// Independent path-law oracles, written out by hand for each model.

fn third() -> DriftedWalk {
    DriftedWalk::new(1.0 / 3.0).unwrap()
}

/// All ±1 paths of length `n` from 0 with `P(step +1) = up`, keyed by
/// `(x_1..x_n)`.
fn walk_paths(up: f64, n: usize) -> Vec<(Vec<i64>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|(p, w): (Vec<i64>, f64)| {
                let x = *p.last().unwrap_or(&0);
                [(x + 1, up), (x - 1, 1.0 - up)].into_iter().map(move |(y, q)| {
                    let mut p = p.clone();
                    p.push(y);
                    (p, w * q)
                })
            })
            .collect();
    }
    out
}

/// Simple symmetric walk from 0 that freezes once negative.
fn absorbed_paths(n: usize) -> BTreeMap<Vec<i64>, f64> {
    let mut out = vec![(Vec::new(), 1.0)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|(p, w): (Vec<i64>, f64)| {
                let x = *p.last().unwrap_or(&0);
                let steps = if x < 0 { vec![(x, 1.0)] } else { vec![(x + 1, 0.5), (x - 1, 0.5)] };
                steps.into_iter().map(move |(y, q)| {
                    let mut p = p.clone();
                    p.push(y);
                    (p, w * q)
                })
            })
            .collect();
    }
    out.into_iter().collect()
}

/// Simple random walk on the free product of `r` involutions: append any
/// letter different from the last, or cancel the last.
fn tree_paths(r: u8, n: usize) -> BTreeMap<Vec<String>, f64> {
    let encode = |w: &[u8]| {
        if w.is_empty() {
            "e".to_string()
        } else {
            w.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(".")
        }
    };
    let mut out: Vec<(Vec<Vec<u8>>, f64)> = vec![(Vec::new(), 1.0)];
    for _ in 0..n {
        let mut next = Vec::new();
        for (p, w) in out {
            let x = p.last().cloned().unwrap_or_default();
            for a in 0..r {
                let mut y = x.clone();
                if y.last() == Some(&a) {
                    y.pop();
                } else {
                    y.push(a);
                }
                let mut q = p.clone();
                q.push(y);
                next.push((q, w / r as f64));
            }
        }
        out = next;
    }
    let mut law = BTreeMap::new();
    for (p, w) in out {
        *law.entry(p.iter().map(|x| encode(x)).collect()).or_insert(0.0) += w;
    }
    law
}

fn encoded<S: State>(law: &BTreeMap<Vec<S>, f64>) -> BTreeMap<Vec<String>, f64> {
    law.iter().map(|(k, v)| (k.iter().map(State::encode).collect(), *v)).collect()
}

fn max_gap(a: &BTreeMap<Vec<String>, f64>, b: &BTreeMap<Vec<String>, f64>) -> f64 {
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max)
}

/// Direct side of the split identity for the p = 1/3 walk from the ruin
/// formulas: `P_x(stay ≤ k) = 1 − 2^{−(k−x+1)}` and `P_x(reach k+1) =
/// 2^{−(k+1−x)}`.
fn walk_direct(n: usize, index: SplitIndex) -> BTreeMap<Vec<String>, f64> {
    let mut law = BTreeMap::new();
    for (p, w) in walk_paths(1.0 / 3.0, n) {
        let full: Vec<i64> = std::iter::once(0).chain(p.iter().copied()).collect();
        let end = full[n];
        let top = *full.iter().max().unwrap();
        let weight = match index {
            SplitIndex::At(m) => {
                let before = full[..m].iter().all(|&x| x < full[m]);
                let after = full[m + 1..].iter().all(|&x| x <= full[m]);
                if !(before && after) {
                    continue;
                }
                w * (1.0 - 0.5f64.powi((full[m] - end + 1) as i32))
            }
            SplitIndex::Tail => w * 0.5f64.powi((top + 1 - end) as i32),
        };
        if weight > 0.0 {
            law.insert(p.iter().map(|x| x.to_string()).collect(), weight);
        }
    }
    law
}

fn identity_models(mut f: impl FnMut(&str, &dyn Fn(usize) -> Result<f64, String>) -> Result<(), String>) -> Result<(), String> {
    let w = third();
    let a = AbsorbedWalk::new();
    let t = TreeWalk::standard(3).unwrap();
    f("drifted-walk", &|n| {
        let c = split_identity_errors(&w, &0, n).map_err(|e| e.to_string())?;
        Ok(c.per_index.values().fold(0.0, |m: f64, v| m.max(*v)))
    })?;
    f("absorbed-walk", &|n| {
        let c = split_identity_errors(&a, &0, n).map_err(|e| e.to_string())?;
        Ok(c.per_index.values().fold(0.0, |m: f64, v| m.max(*v)))
    })?;
    f("tree-walk", &|n| {
        let c = split_identity_errors(&t, &t.origin(), n).map_err(|e| e.to_string())?;
        Ok(c.per_index.values().fold(0.0, |m: f64, v| m.max(*v)))
    })
}

fn split_law_identity() -> Outcome {
    timed(Duration::from_secs(5), "split-law identity", || {
        let mut worst = 0.0f64;
        identity_models(|name, errors| {
            for n in 0..=4 {
                let e = errors(n)?;
                ensure(e <= EXACT_TOL, || format!("{name} n={n}: direct vs constructed differ by {e:e}"))?;
                worst = worst.max(e);
            }
            Ok(())
        })?;
        // the walk against hand-written ruin formulas, every m and the tail
        let w = third();
        for n in 0..=4 {
            for index in (0..=n).map(SplitIndex::At).chain([SplitIndex::Tail]) {
                let oracle = walk_direct(n, index);
                let direct = encoded(&direct_split_law(&w, &0, n, index).map_err(|e| e.to_string())?.law);
                let built = encoded(&constructed_split_law(&w, &0, n, index).map_err(|e| e.to_string())?.law);
                let e = max_gap(&oracle, &direct).max(max_gap(&oracle, &built));
                ensure(e <= EXACT_TOL, || format!("walk n={n} {index:?}: off the ruin oracle by {e:e}"))?;
                worst = worst.max(e);
            }
        }
        Ok(format!("max entrywise error {worst:.2e} over 3 models, n ≤ 4"))
    })
}

fn total_law_reconstruction() -> Outcome {
    let mut worst = 0.0f64;
    let mut check = |name: &str, n: usize, oracle: BTreeMap<Vec<String>, f64>, direct: BTreeMap<Vec<String>, f64>, built: BTreeMap<Vec<String>, f64>| {
        let e = max_gap(&oracle, &direct).max(max_gap(&oracle, &built));
        worst = worst.max(e);
        ensure(e <= EXACT_TOL, || format!("{name} n={n}: reconstruction off by {e:e}"))
    };
    fn sums<M: Model>(m: &M, o: &M::State, n: usize) -> Result<(BTreeMap<Vec<String>, f64>, BTreeMap<Vec<String>, f64>), String> {
        let mut d = BTreeMap::new();
        let mut c = BTreeMap::new();
        for index in (0..=n).map(SplitIndex::At).chain([SplitIndex::Tail]) {
            for (k, v) in encoded(&direct_split_law(m, o, n, index).map_err(|e| e.to_string())?.law) {
                *d.entry(k).or_insert(0.0) += v;
            }
            for (k, v) in encoded(&constructed_split_law(m, o, n, index).map_err(|e| e.to_string())?.law) {
                *c.entry(k).or_insert(0.0) += v;
            }
        }
        Ok((d, c))
    }
    let w = third();
    let a = AbsorbedWalk::new();
    let t = TreeWalk::standard(3).unwrap();
    for n in 0..=4 {
        let walk: BTreeMap<Vec<String>, f64> =
            walk_paths(1.0 / 3.0, n).into_iter().map(|(p, w)| (p.iter().map(|x| x.to_string()).collect(), w)).collect();
        let (d, c) = sums(&w, &0, n)?;
        check("drifted-walk", n, walk, d, c)?;
        let absorbed = absorbed_paths(n).into_iter().map(|(p, w)| (p.iter().map(|x| x.to_string()).collect(), w)).collect();
        let (d, c) = sums(&a, &0, n)?;
        check("absorbed-walk", n, absorbed, d, c)?;
        let (d, c) = sums(&t, &t.origin(), n)?;
        check("tree-walk", n, tree_paths(3, n), d, c)?;
    }
    Ok(format!("max entrywise error {worst:.2e} over 3 models, n ≤ 4"))
}

fn chi2_p(counts: &BTreeMap<Vec<String>, u64>, law: &BTreeMap<Vec<String>, f64>) -> Result<f64, String> {
    Ok(chi2_against_law(counts, law).map_err(|e| e.to_string())?.p_value)
}

fn max_sampler() -> Outcome {
    timed(Duration::from_secs(30), "max-decomposition sampler", || {
        let reps = suites::SAMPLER_REPS;
        let seed = suites::SAMPLER_SEED;
        let alpha = suites::SAMPLER_ALPHA;
        let opts = SamplerOptions::default();
        let n = 4;
        let w = third();
        let walk = replicate(seed, reps, 0, |_, s| {
            let d = theorem2_sample(&w, &0, n, &opts, s)?;
            Ok(d.path[1..].iter().map(State::encode).collect::<Vec<_>>())
        })
        .map_err(|e| e.to_string())?;
        let walk = count(walk);
        let law: BTreeMap<Vec<String>, f64> =
            walk_paths(1.0 / 3.0, n).into_iter().map(|(p, w)| (p.iter().map(|x| x.to_string()).collect(), w)).collect();
        let p_walk = chi2_p(&walk, &law)?;
        ensure(p_walk > alpha, || format!("walk p-value {p_walk:.3e}"))?;
        // power: the same sample against the p = 0.36 walk must be rejected
        let wrong: BTreeMap<Vec<String>, f64> =
            walk_paths(0.36, n).into_iter().map(|(p, w)| (p.iter().map(|x| x.to_string()).collect(), w)).collect();
        let p_wrong = chi2_p(&walk, &wrong)?;
        ensure(p_wrong < alpha, || format!("test has no power: p = {p_wrong:.3e} against p = 0.36"))?;

        let t = TreeWalk::standard(3).unwrap();
        let o = t.origin();
        let tree = replicate(seed, reps, 0, |_, s| {
            let d = theorem2_sample(&t, &o, n, &opts, s)?;
            Ok(d.path[1..].iter().map(State::encode).collect::<Vec<_>>())
        })
        .map_err(|e| e.to_string())?;
        let p_tree = chi2_p(&count(tree), &tree_paths(3, n))?;
        ensure(p_tree > alpha, || format!("tree p-value {p_tree:.3e}"))?;
        Ok(format!("p-values walk {p_walk:.3}, tree {p_tree:.3}; wrong-law p {p_wrong:.1e}"))
    })
}

fn dual_sampler() -> Outcome {
    timed(Duration::from_secs(30), "dual sampler", || {
        let opts = SamplerOptions::default();
        let n = 4;
        let w = third();
        let paths = replicate(suites::SAMPLER_SEED, suites::SAMPLER_REPS, 0, |_, s| {
            let d = theorem3_sample(&w, &0, n, &opts, s)?;
            Ok(d.path[1..].iter().map(State::encode).collect::<Vec<_>>())
        })
        .map_err(|e| e.to_string())?;
        // the transformed p = 1/3 walk steps up with probability 2/3
        let law: BTreeMap<Vec<String>, f64> =
            walk_paths(2.0 / 3.0, n).into_iter().map(|(p, w)| (p.iter().map(|x| x.to_string()).collect(), w)).collect();
        let counts = count(paths);
        let p = chi2_p(&counts, &law)?;
        ensure(p > suites::SAMPLER_ALPHA, || format!("p-value {p:.3e}"))?;
        let untransformed: BTreeMap<Vec<String>, f64> =
            walk_paths(1.0 / 3.0, n).into_iter().map(|(p, w)| (p.iter().map(|x| x.to_string()).collect(), w)).collect();
        let p_wrong = chi2_p(&counts, &untransformed)?;
        ensure(p_wrong < suites::SAMPLER_ALPHA, || "sample also fits the untransformed walk".into())?;
        Ok(format!("p-value {p:.3}"))
    })
}

fn exact_supremum() -> Outcome {
    let reps = suites::SUP_REPS;
    let w = third();
    let walk: Vec<(f64, f64)> = (1..=6).map(|k| (w.harmonic().eval(&k), 0.5f64.powi(k as i32))).collect();
    let mut reports = check_sup_sample(&w, &0, &walk, reps, None, suites::SUP_MAX_STEPS, suites::SUP_SEED, 0)
        .map_err(|e| e.to_string())?;
    let a = AbsorbedWalk::new();
    let absorbed: Vec<(f64, f64)> = (1..=6i64).map(|k| (a.harmonic().eval(&k), 1.0 / (k + 1) as f64)).collect();
    reports.extend(
        check_sup_sample(
            &a,
            &0,
            &absorbed,
            reps,
            Some(suites::ABSORBED_SUP_CENSOR),
            suites::SUP_MAX_STEPS,
            suites::SUP_SEED,
            0,
        )
        .map_err(|e| e.to_string())?,
    );
    reports_pass(&reports)
}

fn doob() -> Outcome {
    reports_pass(&suites::doob(None, 0).map_err(|e| e.to_string())?)
}

fn crossing_identities() -> Outcome {
    reports_pass(&suites::lemma6(None, 0).map_err(|e| e.to_string())?)
}

fn mixture() -> Outcome {
    reports_pass(&suites::mixture().map_err(|e| e.to_string())?)
}

fn tree_algebra() -> Outcome {
    let library = suites::tree_algebra().map_err(|e| e.to_string())?;
    let summary = reports_pass(&library)?;
    // recurrences recomputed here in exact arithmetic: one neighbour toward
    // ω and r − 1 away under P; (r−1)/r toward ω and 1/r away under P^h
    let mut checked = 0;
    for r in 3u8..=6 {
        let ri = r as i128;
        let toward = Ratio::new(1, ri);
        let away = Ratio::new(ri - 1, ri);
        let q = |n: i64| if n > 0 { Ratio::from_integer(0) } else { tree_q_tilde_exact(r, n) };
        let qs = |i: i64| if i <= 0 { Ratio::from_integer(0) } else { tree_q_star_tilde_exact(r, i) };
        ensure(q(0) == Ratio::from_integer(1) && q(1) == Ratio::from_integer(0), || format!("r={r}: q̃ boundary"))?;
        ensure(qs(0) == Ratio::from_integer(0) && qs(1) > Ratio::from_integer(0), || format!("r={r}: q̃* boundary"))?;
        for i in -10i64..=10 {
            if i <= 0 {
                ensure(q(i) == toward * q(i + 1) + away * q(i - 1), || format!("r={r}, i={i}: q̃ recurrence"))?;
            }
            if i >= 1 {
                ensure(qs(i) == away * qs(i + 1) + toward * qs(i - 1), || format!("r={r}, i={i}: q̃* recurrence"))?;
            }
            checked += 1;
        }
    }
    // every word of length ≤ 4
    let mut words = 0;
    for r in 3u8..=5 {
        let mut layer = vec![Vec::<u8>::new()];
        for _ in 0..=4 {
            let mut next = Vec::new();
            for w in &layer {
                let res = boundary_mixture_check(r, &Word::new(w.clone()).unwrap()).map_err(|e| e.to_string())?;
                ensure(res.exact == Ratio::from_integer(0), || format!("r={r}, word {w:?}: residual {}", res.exact))?;
                words += 1;
                for a in 0..r {
                    if w.last() != Some(&a) {
                        let mut v = w.clone();
                        v.push(a);
                        next.push(v);
                    }
                }
            }
            layer = next;
        }
    }
    Ok(format!("{summary}; {checked} recurrence points and {words} mixture words rechecked"))
}

fn harmonicity() -> Outcome {
    reports_pass(&suites::harmonicity().map_err(|e| e.to_string())?)
}

fn undetectability() -> Outcome {
    reports_pass(&suites::undetectable(None, 0).map_err(|e| e.to_string())?)
}

fn convergence_to_sup() -> Outcome {
    let reports = suites::prop7(None, 0).map_err(|e| e.to_string())?;
    for name in ["prop7/drifted-walk", "prop7/tree-walk", "prop7/polya-urn/h_p"] {
        ensure(reports.iter().any(|r| r.name == name && r.pass && !r.skipped), || format!("{name} missing or failing"))?;
    }
    reports_pass(&reports)
}

fn record_bytes(config: &ExperimentConfig, workers: usize) -> Result<Vec<u8>, String> {
    let out = execute(config, workers).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    record::write(&mut buf, &out.lines, config.output.format).map_err(|e| e.to_string())?;
    Ok(buf)
}

fn reproducibility() -> Outcome {
    let configs = [
        r#"{"model": {"name": "drifted-walk", "params": {"p": 0.3333333333333333}}, "operation": "decompose", "steps": 4, "replications": 100000, "seed": 7}"#,
        r#"{"model": {"name": "tree-walk", "params": {"r": 3}}, "operation": "dual", "steps": 6, "replications": 5000, "seed": 2}"#,
        r#"{"model": {"name": "absorbed-walk"}, "operation": "sup-sample", "replications": 5000, "seed": 3, "censor": 7.0}"#,
        r#"{"model": {"name": "polya-urn", "params": {"harmonic": "ratio"}}, "operation": "decompose", "steps": 3, "replications": 300, "seed": 4, "policy": {"truncated": {"horizon": 100}}}"#,
        r#"{"model": {"name": "lattice-walk", "params": {"increments": [{"step": [1, 0], "prob": 0.2}, {"step": [-1, 0], "prob": 0.3}, {"step": [0, 1], "prob": 0.15}, {"step": [0, -1], "prob": 0.35}], "direction": [1.0, 2.0]}}, "operation": "simulate", "steps": 20, "replications": 2000, "seed": 5, "output": {"format": "csv"}}"#,
    ];
    let mut bytes = 0;
    for text in configs {
        let config = ExperimentConfig::from_json(text).map_err(|e| e.to_string())?;
        let a = record_bytes(&config, 1)?;
        let b = record_bytes(&config, 8)?;
        let c = record_bytes(&config, 1)?;
        let op = config.operation.as_ref().map(|o| o.to_string()).unwrap_or_default();
        ensure(a == b, || format!("{op}: workers 1 and 8 differ"))?;
        ensure(a == c, || format!("{op}: rerun differs"))?;
        bytes += a.len();
    }
    // and through the binary, writing files
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("decompose.json");
    std::fs::write(&cfg, configs[0]).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "8", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}.ndjson"));
        let status = Command::new(env!("CARGO_BIN_EXE_pathsplit"))
            .args(["decompose", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--workers", workers])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || format!("cli exit {:?}", status.status.code()))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1] && outputs[0] == outputs[2], || "cli records differ".into())?;
    ensure(outputs[0].iter().filter(|&&b| b == b'\n').count() == 100_002, || "expected 10⁵ samples plus header and summary".into())?;
    Ok(format!("5 configs × (rerun, workers 1 vs 8) identical, {bytes} bytes; cli files identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("split-law identity", split_law_identity),
        ("total-law reconstruction", total_law_reconstruction),
        ("max-decomposition sampler", max_sampler),
        ("dual sampler", dual_sampler),
        ("exact supremum sampling", exact_supremum),
        ("maximal inequality", doob),
        ("crossing and survival identities", crossing_identities),
        ("shifted-h mixture law", mixture),
        ("tree algebra", tree_algebra),
        ("harmonicity and involution", harmonicity),
        ("undetectability demonstration", undetectability),
        ("convergence to sup h", convergence_to_sup),
        ("reproducibility", reproducibility),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{took:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{took:.1?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
