//! Named verification suites with registered seeds, sample sizes and
//! thresholds. The CLI's `verify <suite>` and the acceptance tests both run
//! these, so a suite produces the same reports wherever it is invoked.

use pathsplit_core::models::{
    AbsorbedWalk, Boundary, ConstantModel, DriftedWalk, LatticeWalk, PolyaUrn, PolyaVariant, TreeWalk, UrnState,
};
use pathsplit_core::{Harmonic, Model};

use crate::error::{RunError, RunResult};
use crate::verify::*;

pub const SUITES: &[&str] = &[
    "harmonicity",
    "survival",
    "split-identities",
    "dual-total-law",
    "sampler",
    "sup-sample",
    "doob",
    "lemma6",
    "mixture",
    "tree-algebra",
    "undetectable",
    "prop7",
];

pub const SAMPLER_SEED: u64 = 7;
pub const SAMPLER_REPS: usize = 100_000;
pub const SAMPLER_ALPHA: f64 = 0.001;
pub const SUP_SEED: u64 = 11;
pub const SUP_REPS: usize = 100_000;
/// Censoring level for the absorbed walk's supremum sampler.
pub const ABSORBED_SUP_CENSOR: f64 = 7.0;
pub const SUP_MAX_STEPS: usize = 10_000_000;
pub const DOOB_SEED: u64 = 13;
pub const DOOB_REPS: usize = 100_000;
pub const LEMMA6_SEED: u64 = 17;
pub const LEMMA6_REPS: usize = 100_000;
pub const LEMMA6_HORIZON: usize = 2_000;
pub const UNDETECTABLE_SEED: u64 = 19;
pub const UNDETECTABLE_REPS: usize = 10_000;
pub const UNDETECTABLE_HORIZONS: [usize; 3] = [100, 1_000, 10_000];
/// Registered from a pilot run (seed 1, 10⁴ runs): urn non-crossing 0.659
/// at every horizon, candidate T moving for 0.150 and 0.050 of runs,
/// control non-crossing 0 from H = 10³ on.
pub const UNDETECTABLE_THRESHOLDS: UndetectableThresholds = UndetectableThresholds {
    non_crossing_floor: 0.6,
    moved_floor: 0.03,
    control_ceiling: 0.001,
};
pub const PROP7_SEED: u64 = 23;
pub const PROP7_REPS: usize = 10_000;

fn seed_or(seed: Option<u64>, registered: u64) -> u64 {
    seed.unwrap_or(registered)
}

pub fn drifted() -> DriftedWalk {
    DriftedWalk::new(1.0 / 3.0).expect("valid p")
}

pub fn tree3() -> TreeWalk {
    TreeWalk::standard(3).expect("valid r")
}

fn urn(variant: PolyaVariant) -> PolyaUrn {
    PolyaUrn::new(variant).expect("valid variant")
}

pub fn planar_walk() -> LatticeWalk {
    LatticeWalk::new(
        vec![(vec![1, 0], 0.2), (vec![-1, 0], 0.3), (vec![0, 1], 0.15), (vec![0, -1], 0.35)],
        vec![1.0, 2.0],
    )
    .expect("valid increments")
}

fn harmonic_pair<M: Model>(model: &M, out: &mut Vec<TestReport>) -> RunResult<()> {
    out.push(check_harmonicity(model)?);
    out.push(check_involution(model)?);
    Ok(())
}

pub fn harmonicity() -> RunResult<Vec<TestReport>> {
    let mut out = Vec::new();
    harmonic_pair(&drifted(), &mut out)?;
    harmonic_pair(&DriftedWalk::new(0.7)?, &mut out)?;
    harmonic_pair(&AbsorbedWalk::new(), &mut out)?;
    harmonic_pair(&urn(PolyaVariant::Bernoulli { p: 0.5 }), &mut out)?;
    harmonic_pair(&urn(PolyaVariant::Bernoulli { p: 0.3 }), &mut out)?;
    harmonic_pair(&urn(PolyaVariant::Ratio), &mut out)?;
    for r in 3..=5 {
        harmonic_pair(&TreeWalk::standard(r)?, &mut out)?;
    }
    harmonic_pair(&TreeWalk::new(Boundary::seeded(4, 99, 12))?, &mut out)?;
    harmonic_pair(&planar_walk(), &mut out)?;
    harmonic_pair(&ConstantModel::walk(0.3)?, &mut out)?;
    Ok(out)
}

pub fn survival() -> RunResult<Vec<TestReport>> {
    let mut out = Vec::new();
    out.extend(check_survivals(&drifted())?);
    out.extend(check_survivals(&DriftedWalk::new(0.7)?)?);
    out.extend(check_survivals(&AbsorbedWalk::new())?);
    out.extend(check_survivals(&tree3())?);
    out.extend(check_survivals(&TreeWalk::standard(4)?)?);
    out.extend(check_survivals(&ConstantModel::walk(0.3)?)?);
    Ok(out)
}

fn identities<M: Model>(model: &M, max_n: usize, out: &mut Vec<TestReport>) -> RunResult<()> {
    let o = model.origin();
    for n in 0..=max_n {
        out.push(check_split_identities(model, &o, n)?);
        out.push(check_total_law(model, &o, n)?);
    }
    Ok(())
}

pub fn split_identities() -> RunResult<Vec<TestReport>> {
    let mut out = Vec::new();
    identities(&drifted(), 4, &mut out)?;
    identities(&AbsorbedWalk::new(), 4, &mut out)?;
    identities(&tree3(), 4, &mut out)?;
    identities(&DriftedWalk::new(0.7)?, 4, &mut out)?;
    identities(&TreeWalk::standard(4)?, 3, &mut out)?;
    identities(&ConstantModel::walk(0.3)?, 4, &mut out)?;
    Ok(out)
}

fn dual<M: Model>(model: &M, max_n: usize, out: &mut Vec<TestReport>) -> RunResult<()> {
    let o = model.origin();
    for n in 0..=max_n {
        out.push(check_dual_total_law(model, &o, n)?);
    }
    Ok(())
}

pub fn dual_total_law() -> RunResult<Vec<TestReport>> {
    let mut out = Vec::new();
    dual(&drifted(), 4, &mut out)?;
    dual(&tree3(), 4, &mut out)?;
    dual(&AbsorbedWalk::new(), 4, &mut out)?;
    dual(&ConstantModel::walk(0.3)?, 4, &mut out)?;
    Ok(out)
}

pub fn sampler(seed: Option<u64>, workers: usize) -> RunResult<Vec<TestReport>> {
    let seed = seed_or(seed, SAMPLER_SEED);
    let w = drifted();
    let t = tree3();
    Ok(vec![
        check_theorem2_law(&w, &0, 4, SAMPLER_REPS, SAMPLER_ALPHA, seed, workers)?,
        check_theorem2_law(&t, &t.origin(), 4, SAMPLER_REPS, SAMPLER_ALPHA, seed, workers)?,
        check_theorem3_law(&w, &0, 4, SAMPLER_REPS, SAMPLER_ALPHA, seed, workers)?,
    ])
}

pub fn sup_sample(seed: Option<u64>, workers: usize) -> RunResult<Vec<TestReport>> {
    let seed = seed_or(seed, SUP_SEED);
    let w = drifted();
    let oracle: Vec<(f64, f64)> = (1..=6).map(|k| (2f64.powi(k), w.prob_max_at_least(k as i64))).collect();
    let mut out = check_sup_sample(&w, &0, &oracle, SUP_REPS, None, SUP_MAX_STEPS, seed, workers)?;
    let a = AbsorbedWalk::new();
    let oracle: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64 + 1.0, a.prob_reach(k))).collect();
    out.extend(check_sup_sample(&a, &0, &oracle, SUP_REPS, Some(ABSORBED_SUP_CENSOR), SUP_MAX_STEPS, seed, workers)?);
    Ok(out)
}

pub fn doob(seed: Option<u64>, workers: usize) -> RunResult<Vec<TestReport>> {
    let seed = seed_or(seed, DOOB_SEED);
    let ns = [10, 100];
    let factors = [2.0, 4.0, 8.0];
    let mut out = Vec::new();
    out.extend(check_doob(&drifted(), &0, &ns, &factors, DOOB_REPS, seed, workers)?);
    let t = tree3();
    out.extend(check_doob(&t, &t.origin(), &ns, &factors, DOOB_REPS, seed, workers)?);
    for variant in [PolyaVariant::Bernoulli { p: 0.5 }, PolyaVariant::Ratio] {
        let u = urn(variant);
        out.extend(check_doob(&u, &u.origin(), &ns, &factors, DOOB_REPS, seed, workers)?);
    }
    Ok(out)
}

/// The `(x, s)` grid for the drifted walk: levels at, between and above
/// powers of `h`.
pub fn lemma6_grid() -> Vec<(i64, f64)> {
    let w = drifted();
    let mut grid = Vec::new();
    for x in 0..=2i64 {
        let hx = w.harmonic().eval(&x);
        for s in [hx, 1.5 * hx, 4.0 * hx, 16.0 * hx] {
            grid.push((x, s));
        }
    }
    grid
}

pub fn lemma6(seed: Option<u64>, workers: usize) -> RunResult<Vec<TestReport>> {
    let seed = seed_or(seed, LEMMA6_SEED);
    let w = drifted();
    let mut out = Vec::new();
    for (i, (x, s)) in lemma6_grid().into_iter().enumerate() {
        let bound = drifted_truncation_bound(&w, x, s, LEMMA6_HORIZON);
        out.extend(check_lemma6(&w, &x, s, LEMMA6_REPS, LEMMA6_HORIZON, bound, seed.wrapping_add(i as u64), workers)?);
    }
    for x in 0..=4 {
        out.push(check_lemma6_complement(&w, &x)?);
        out.push(check_lemma6_complement(&AbsorbedWalk::new(), &x)?);
    }
    Ok(out)
}

pub fn mixture() -> RunResult<Vec<TestReport>> {
    let ratio = urn(PolyaVariant::Ratio);
    let o = UrnState::new(1, 2)?;
    let mut out = Vec::new();
    for eps in [0.5, 2.0, 0.0] {
        out.push(check_mixture(&ratio, &o, eps, 3)?);
    }
    out.push(check_mixture(&urn(PolyaVariant::Bernoulli { p: 0.3 }), &o, 0.5, 3)?);
    out.push(check_mixture(&drifted(), &0, 2.0, 4)?);
    Ok(out)
}

pub fn tree_algebra() -> RunResult<Vec<TestReport>> {
    check_tree_algebra(3..=6, 10, 3..=5, 4)
}

pub fn undetectable(seed: Option<u64>, workers: usize) -> RunResult<Vec<TestReport>> {
    let seed = seed_or(seed, UNDETECTABLE_SEED);
    demo_undetectable(UNDETECTABLE_REPS, &UNDETECTABLE_HORIZONS, UNDETECTABLE_THRESHOLDS, seed, workers)
}

/// Registered convergence-to-sup specifications. Pilot (seed 1, 10⁴ runs):
/// fractions 1.0, 1.0 and 0.9935 at the last grid point.
pub fn prop7_specs() -> [(&'static str, Prop7Spec); 3] {
    [
        (
            "drifted-walk",
            Prop7Spec { grid: vec![10, 100, 1_000], threshold: 2f64.powi(10), min_fraction: 0.999 },
        ),
        (
            "tree-walk",
            Prop7Spec { grid: vec![10, 100, 1_000], threshold: 2f64.powi(10), min_fraction: 0.999 },
        ),
        (
            "polya-urn/h_p",
            Prop7Spec { grid: vec![100, 1_000, 10_000], threshold: 2.0, min_fraction: 0.98 },
        ),
    ]
}

pub fn prop7(seed: Option<u64>, workers: usize) -> RunResult<Vec<TestReport>> {
    let seed = seed_or(seed, PROP7_SEED);
    let [(_, dw), (_, tw), (_, pu)] = prop7_specs();
    let t = tree3();
    let u = urn(PolyaVariant::Bernoulli { p: 0.5 });
    Ok(vec![
        check_prop7(&drifted(), &0, &dw, PROP7_REPS, seed, workers)?,
        check_prop7(&t, &t.origin(), &tw, PROP7_REPS, seed, workers)?,
        check_prop7(&u, &u.origin(), &pu, PROP7_REPS, seed, workers)?,
        check_prop7(&ConstantModel::walk(0.3)?, &0, &dw, 10, seed, workers)?,
    ])
}

/// Run one suite by name (`all` runs every suite in order).
pub fn run_suite(name: &str, seed: Option<u64>, workers: usize) -> RunResult<Vec<TestReport>> {
    match name {
        "harmonicity" => harmonicity(),
        "survival" => survival(),
        "split-identities" => split_identities(),
        "dual-total-law" => dual_total_law(),
        "sampler" => sampler(seed, workers),
        "sup-sample" => sup_sample(seed, workers),
        "doob" => doob(seed, workers),
        "lemma6" => lemma6(seed, workers),
        "mixture" => mixture(),
        "tree-algebra" => tree_algebra(),
        "undetectable" => undetectable(seed, workers),
        "prop7" => prop7(seed, workers),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s, seed, workers)?);
            }
            Ok(out)
        }
        other => Err(RunError::Config(format!(
            "unknown suite '{other}'; expected one of {} or all",
            SUITES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_config_error() {
        assert!(matches!(run_suite("nope", None, 1), Err(RunError::Config(_))));
    }

    #[test]
    fn lemma6_grid_respects_preconditions() {
        let w = drifted();
        for (x, s) in lemma6_grid() {
            assert!(w.harmonic().eval(&x) <= s);
        }
    }
}
