//! Exact and Monte Carlo checks of the identities around the decompositions.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::{One, Zero};
use pathsplit_core::chain::{
    check_harmonic, h_transform, law_distance, path_law, transformed_prefix_law, Reciprocal, Shifted, HARMONIC_TOL,
};
use pathsplit_core::conditioning::{above_level, below_level, validate_survival};
use pathsplit_core::decomposition::{
    censored_sup_sample, exact_sup_sample, sample_level_y, theorem2_sample, theorem3_sample,
};
use pathsplit_core::models::{
    boundary_mixture_check, tree_q_star_tilde_exact, tree_q_tilde_exact, DriftedWalk, PolyaUrn, PolyaVariant,
    TreeWalk,
};
use pathsplit_core::{ChainError, Harmonic, Kernel, Model, SamplerOptions, State};

use super::report::TestReport;
use super::split::EXACT_TOL;
use super::stats::{count, two_sample_chi2, Reference};
use crate::error::{RunError, RunResult};
use crate::parallel::replicate;

/// Transforming twice must give back `P`; floating round-off only.
pub const INVOLUTION_TOL: f64 = 1e-14;

fn sigma(p: f64, reps: usize) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

fn merged<S: Ord>(row: Vec<(S, f64)>) -> BTreeMap<S, f64> {
    let mut out = BTreeMap::new();
    for (y, p) in row {
        *out.entry(y).or_insert(0.0) += p;
    }
    out
}

fn row_distance<S: Ord>(a: &BTreeMap<S, f64>, b: &BTreeMap<S, f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, v) in a {
        worst = worst.max((v - b.get(k).copied().unwrap_or(0.0)).abs());
    }
    for (k, v) in b {
        if !a.contains_key(k) {
            worst = worst.max(v.abs());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// harmonicity, transforms, survivals

pub fn check_harmonicity<M: Model>(model: &M) -> RunResult<TestReport> {
    let rep = check_harmonic(model.kernel(), model.harmonic(), &model.test_states(), HARMONIC_TOL)?;
    let worst = rep
        .residuals
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(x, _)| x.encode())
        .unwrap_or_default();
    Ok(TestReport::at_most(
        format!("harmonic/{}/{}", model.name(), model.harmonic().name()),
        "max |Ph − h| on the state grid",
        rep.max_residual,
        HARMONIC_TOL,
    )
    .with_sizes(vec![rep.residuals.len()])
    .with_detail(format!("worst state {worst}")))
}

/// Applying the `1/h`-transform to `P^h` recovers `P` on `{h > 0}`, and the
/// model's closed-form `P^h` agrees with the generic transform.
pub fn check_involution<M: Model>(model: &M) -> RunResult<TestReport> {
    let h = model.harmonic();
    let hat = h_transform(model.kernel(), h);
    let back = h_transform(&hat, Reciprocal(h));
    let mut involution: f64 = 0.0;
    let mut closed_form: f64 = 0.0;
    let mut rows = 0;
    for x in model.test_states() {
        if !(h.eval(&x) > 0.0) {
            continue;
        }
        rows += 1;
        let p: BTreeMap<_, _> = merged(model.kernel().step_law(&x)?)
            .into_iter()
            .filter(|(y, _)| h.eval(y) > 0.0)
            .collect();
        let generic = merged(hat.step_law(&x)?);
        involution = involution.max(row_distance(&p, &merged(back.step_law(&x)?)));
        closed_form = closed_form.max(row_distance(&generic, &merged(model.hat_kernel().step_law(&x)?)));
    }
    Ok(TestReport::at_most(
        format!("involution/{}", model.name()),
        "max row error of (P^h)^(1/h) vs P and of closed-form P^h vs generic",
        involution.max(closed_form),
        INVOLUTION_TOL,
    )
    .with_sizes(vec![rows])
    .with_detail(format!("involution {involution:.3e}, closed form {closed_form:.3e}")))
}

/// Positivity of `q_s` on `S_s`, restricted harmonicity of both survivals,
/// over levels taken from the model's state grid.
pub fn check_survivals<M: Model>(model: &M) -> RunResult<Vec<TestReport>> {
    let h = model.harmonic();
    let states = model.test_states();
    let mut levels: Vec<f64> = states.iter().map(|x| h.eval(x)).filter(|v| *v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut nonpositive = 0usize;
    let mut checked = 0usize;
    let mut residual: f64 = 0.0;
    for &s in &levels {
        let Some(q) = model.survival_below(s) else {
            return Ok(vec![TestReport::skipped(
                format!("survival/{}", model.name()),
                "no closed-form survivals",
            )]);
        };
        for x in &states {
            if below_level(h.eval(x), s) {
                checked += 1;
                if !(q.eval(x) > 0.0) {
                    nonpositive += 1;
                }
            }
        }
        residual = residual.max(validate_survival(model.kernel(), h, &q, &states)?.max_residual);
        if let Some(qs) = model.survival_above(s) {
            let hat_states: Vec<_> = states.iter().filter(|x| h.eval(x) > 0.0).cloned().collect();
            residual = residual.max(validate_survival(model.hat_kernel(), h, &qs, &hat_states)?.max_residual);
        }
    }
    Ok(vec![
        TestReport::at_most(
            format!("survival-positive/{}", model.name()),
            "states in S_s with q_s ≤ 0",
            nonpositive as f64,
            0.0,
        )
        .with_sizes(vec![checked, levels.len()]),
        TestReport::at_most(
            format!("survival-harmonic/{}", model.name()),
            "max restricted-harmonicity residual",
            residual,
            EXACT_TOL,
        ),
    ])
}

// ---------------------------------------------------------------------------
// Crossing and survival identities

/// `P(min_{k≤H} S_k − s_0 < D)`-style bound for a walk with ±1 steps and
/// mean `drift > 0`: Hoeffding gives `exp(−(H·drift − D)²/(2H))`.
pub fn hoeffding_walk_tail(drift: f64, distance: f64, horizon: usize) -> f64 {
    let h = horizon as f64;
    let gap = h * drift - distance;
    if gap <= 0.0 {
        1.0
    } else {
        (-gap * gap / (2.0 * h)).exp()
    }
}

/// Truncation bound for the drifted walk: `P^h_x(σ_s > H)`.
pub fn drifted_truncation_bound(walk: &DriftedWalk, x: i64, s: f64, horizon: usize) -> f64 {
    let rho = walk.ratio();
    let z = (walk.harmonic().eval(&x).ln() / rho.ln()).round();
    let k = (s.ln() / rho.ln() + 1e-9).floor();
    hoeffding_walk_tail((rho - 1.0) / (rho + 1.0), k + 1.0 - z, horizon)
}

/// Both crossing/survival identities at `(x, s)` by Monte Carlo under `P^h_x` with
/// `U` uniform on `(0, 1/h(o))`, against their closed-form right sides.
/// Runs are cut at `horizon`; `truncation` bounds `P^h_x(σ_s > horizon)`
/// and is added to the tolerance.
#[allow(clippy::too_many_arguments)]
pub fn check_lemma6<M: Model>(
    model: &M,
    x: &M::State,
    s: f64,
    reps: usize,
    horizon: usize,
    truncation: f64,
    seed: u64,
    workers: usize,
) -> RunResult<Vec<TestReport>> {
    let h = model.harmonic();
    let h_o = h.eval(&model.origin());
    let h_x = h.eval(x);
    if !(h_o > 0.0 && h_o <= h_x && below_level(h_x, s)) {
        return Err(ChainError::Precondition(format!("need 0 < h(o) = {h_o} ≤ h(x) = {h_x} ≤ s = {s}")).into());
    }
    let crossing = model
        .crossing_probability(x, s)
        .ok_or_else(|| ChainError::Unsupported(format!("{} has no crossing oracle", model.name())))?;
    let q = model
        .survival_below(h_x)
        .ok_or_else(|| ChainError::Unsupported(format!("{} has no closed-form survival", model.name())))?;
    let rhs = [h_o / h_x * crossing, h_o / h_x * q.probability(x)];

    let hits = replicate(seed, reps, workers, |_, stream| {
        let u = stream.uniform() / h_o;
        let mut first_x: Option<f64> = None;
        let mut first_s: Option<f64> = None;
        let mut cur = x.clone();
        for _ in 0..horizon {
            cur = model.hat_kernel().sample(&cur, stream)?;
            let v = h.eval(&cur);
            if first_x.is_none() && !below_level(v, h_x) {
                first_x = Some(v);
            }
            if !below_level(v, s) {
                first_s = Some(v);
                break;
            }
        }
        let e1 = first_s.is_some_and(|v| u <= 1.0 / v);
        let e2 = u <= 1.0 / h_x && first_x.is_none_or(|v| 1.0 / v < u);
        Ok([e1, e2])
    })?;
    let mut out = Vec::new();
    for (j, label) in ["crossing", "survival"].iter().enumerate() {
        let est = hits.iter().filter(|e| e[j]).count() as f64 / reps as f64;
        let tol = 3.0 * sigma(rhs[j], reps) + truncation;
        out.push(
            TestReport::at_most(
                format!("lemma6-{label}/{}/x={}/s={s}", model.name(), x.encode()),
                "|MC − closed form|",
                (est - rhs[j]).abs(),
                tol,
            )
            .with_seed(seed)
            .with_sizes(vec![reps, horizon])
            .with_detail(format!("estimate {est:.5}, closed form {:.5}, truncation bound {truncation:.2e}", rhs[j])),
        );
    }
    Ok(out)
}

/// At `s = h(x)` the two right-hand sides add up to `h(o)/h(x)`.
pub fn check_lemma6_complement<M: Model>(model: &M, x: &M::State) -> RunResult<TestReport> {
    let h = model.harmonic();
    let h_o = h.eval(&model.origin());
    let h_x = h.eval(x);
    let unsupported = || RunError::from(ChainError::Unsupported(format!("{} lacks closed forms", model.name())));
    let crossing = model.crossing_probability(x, h_x).ok_or_else(unsupported)?;
    let q = model.survival_below(h_x).ok_or_else(unsupported)?;
    let sum = h_o / h_x * crossing + h_o / h_x * q.probability(x);
    Ok(TestReport::at_most(
        format!("lemma6-complement/{}/x={}", model.name(), x.encode()),
        "|RHS₁ + RHS₂ − h(o)/h(x)|",
        (sum - h_o / h_x).abs(),
        EXACT_TOL,
    ))
}

// ---------------------------------------------------------------------------
// mixture law

/// `P^{h+ε}_o = h(o)/(h(o)+ε)·P^h_o + ε/(h(o)+ε)·P_o` on `n`-step paths.
pub fn check_mixture<M: Model>(model: &M, o: &M::State, epsilon: f64, n: usize) -> RunResult<TestReport> {
    let h = model.harmonic();
    let h_o = h.eval(o);
    let shifted = Shifted { inner: h, epsilon };
    let lhs = transformed_prefix_law(model.kernel(), &shifted, o, n)?;
    let law_h = transformed_prefix_law(model.kernel(), h, o, n)?;
    let law_p = path_law(model.kernel(), o, n)?;
    let a = h_o / (h_o + epsilon);
    let b = epsilon / (h_o + epsilon);
    let mut rhs = BTreeMap::new();
    for (k, v) in &law_h {
        *rhs.entry(k.clone()).or_insert(0.0) += a * v;
    }
    for (k, v) in &law_p {
        *rhs.entry(k.clone()).or_insert(0.0) += b * v;
    }
    rhs.retain(|_, v| *v > 0.0);
    Ok(TestReport::at_most(
        format!("mixture/{}/o={}/eps={epsilon}/n={n}", model.name(), o.encode()),
        "max entrywise |P^(h+ε) − mixture|",
        law_distance(&lhs, &rhs),
        EXACT_TOL,
    )
    .with_sizes(vec![lhs.len()]))
}

// ---------------------------------------------------------------------------
// Convergence of h(X_n) to sup h

#[derive(Debug, Clone, PartialEq)]
pub struct Prop7Spec {
    pub grid: Vec<usize>,
    /// `h(X_n) > threshold` counts as close to `sup h`.
    pub threshold: f64,
    /// Pre-registered `1 − δ` at the last grid point.
    pub min_fraction: f64,
}

pub fn prop7_fractions<M: Model>(model: &M, o: &M::State, spec: &Prop7Spec, reps: usize, seed: u64, workers: usize) -> RunResult<Vec<f64>> {
    let h = model.harmonic();
    let last = spec.grid.iter().copied().max().unwrap_or(0);
    let above = replicate(seed, reps, workers, |_, stream| {
        let mut flags = Vec::with_capacity(spec.grid.len());
        let mut cur = o.clone();
        let mut n = 0;
        for &g in &spec.grid {
            while n < g {
                cur = model.hat_kernel().sample(&cur, stream)?;
                n += 1;
            }
            flags.push(h.eval(&cur) > spec.threshold);
        }
        debug_assert_eq!(n, last);
        Ok(flags)
    })?;
    Ok((0..spec.grid.len())
        .map(|j| above.iter().filter(|f| f[j]).count() as f64 / reps as f64)
        .collect())
}

/// Under `P^h`, `h(X_n)` approaches `sup h` for minimal `h`.
pub fn check_prop7<M: Model>(model: &M, o: &M::State, spec: &Prop7Spec, reps: usize, seed: u64, workers: usize) -> RunResult<TestReport> {
    let name = format!("prop7/{}", model.name());
    if !model.is_minimal() {
        return Ok(TestReport::skipped(name, "h is not declared minimal"));
    }
    let mut grid = spec.grid.clone();
    grid.sort_unstable();
    let spec = Prop7Spec { grid, ..spec.clone() };
    let fractions = prop7_fractions(model, o, &spec, reps, seed, workers)?;
    let monotone = fractions.windows(2).all(|w| w[0] <= w[1]);
    let last = *fractions.last().unwrap_or(&0.0);
    Ok(TestReport::at_least(name, format!("fraction with h(X_n) > {} at the last n", spec.threshold), last, spec.min_fraction)
        .with_seed(seed)
        .with_sizes(vec![reps])
        .with_detail(format!("grid {:?}, fractions {:?}", spec.grid, fractions))
        .require(monotone, "fractions not non-decreasing along the grid"))
}

// ---------------------------------------------------------------------------
// detectability demonstration

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingProfile {
    pub horizons: Vec<usize>,
    /// Estimated `P(τ_c > H)` per horizon.
    pub non_crossing: Vec<f64>,
    /// Fraction of runs whose last record before `τ_c ∧ H` differs between
    /// consecutive horizons.
    pub record_moved: Vec<f64>,
}

/// Run `P^h` with a fresh level `Y` and watch the crossing time and the
/// candidate split index as the horizon grows.
pub fn crossing_profile<M: Model>(model: &M, o: &M::State, horizons: &[usize], reps: usize, seed: u64, workers: usize) -> RunResult<CrossingProfile> {
    let mut horizons = horizons.to_vec();
    horizons.sort_unstable();
    let h = model.harmonic();
    let h_o = h.eval(o);
    let runs = replicate(seed, reps, workers, |_, stream| {
        let level = sample_level_y(h_o, stream);
        let mut cur = o.clone();
        let mut best = h_o;
        let mut last_record = 0usize;
        let mut crossed = false;
        let mut n = 0usize;
        let mut out = Vec::with_capacity(horizons.len());
        for &hz in &horizons {
            while n < hz && !crossed {
                cur = model.hat_kernel().sample(&cur, stream)?;
                n += 1;
                let v = h.eval(&cur);
                if !below_level(v, level) {
                    crossed = true;
                } else if v > best {
                    best = v;
                    last_record = n;
                }
            }
            out.push((crossed, last_record));
        }
        Ok(out)
    })?;
    let k = horizons.len();
    let non_crossing = (0..k)
        .map(|j| runs.iter().filter(|r| !r[j].0).count() as f64 / reps as f64)
        .collect();
    let record_moved = (1..k)
        .map(|j| runs.iter().filter(|r| r[j].1 != r[j - 1].1).count() as f64 / reps as f64)
        .collect();
    Ok(CrossingProfile { horizons, non_crossing, record_moved })
}

/// Registered thresholds for the undetectability demonstration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UndetectableThresholds {
    /// Lower bound for `P(τ_c > H_max)` under the ratio urn.
    pub non_crossing_floor: f64,
    /// Lower bound for the fraction of urn runs whose candidate split moves
    /// between consecutive horizons.
    pub moved_floor: f64,
    /// Upper bound for `P(τ_c > H_max)` under the drifted-walk control.
    pub control_ceiling: f64,
}

/// Pólya urn with `h = r/t` against the drifted walk with `p = 1/3`.
pub fn demo_undetectable(reps: usize, horizons: &[usize], thresholds: UndetectableThresholds, seed: u64, workers: usize) -> RunResult<Vec<TestReport>> {
    let urn = PolyaUrn::new(PolyaVariant::Ratio)?;
    let p = crossing_profile(&urn, &urn.origin(), horizons, reps, seed, workers)?;
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[0] >= w[1]);
    let floor = TestReport::at_least(
        "undetectable/polya-urn/ratio/non-crossing",
        "P(τ_c > H) at the largest horizon",
        *p.non_crossing.last().unwrap_or(&0.0),
        thresholds.non_crossing_floor,
    )
    .with_seed(seed)
    .with_sizes(vec![reps])
    .with_detail(format!("horizons {:?}, estimates {:?}", p.horizons, p.non_crossing))
    .require(monotone(&p.non_crossing), "non-crossing estimates increase with the horizon");
    let moved = TestReport::at_least(
        "undetectable/polya-urn/ratio/record-moves",
        "min fraction of runs whose candidate T moves between horizons",
        p.record_moved.iter().copied().fold(f64::INFINITY, f64::min),
        thresholds.moved_floor,
    )
    .with_seed(seed)
    .with_sizes(vec![reps])
    .with_detail(format!("fractions {:?}", p.record_moved));

    let walk = DriftedWalk::new(1.0 / 3.0)?;
    let c = crossing_profile(&walk, &0, horizons, reps, seed, workers)?;
    let control = TestReport::at_most(
        "undetectable/drifted-walk-control/non-crossing",
        "P(τ_c > H) at the largest horizon",
        *c.non_crossing.last().unwrap_or(&1.0),
        thresholds.control_ceiling,
    )
    .with_seed(seed)
    .with_sizes(vec![reps])
    .with_detail(format!("estimates {:?}", c.non_crossing))
    .require(monotone(&c.non_crossing), "non-crossing estimates increase with the horizon");
    Ok(vec![floor, moved, control])
}

// ---------------------------------------------------------------------------
// Doob inequality

/// `P(max_{1≤i≤n} h(X_i) ≥ λ) ≤ h(o)/λ + 3σ` for every `n` and `λ = c·h(o)`.
pub fn check_doob<M: Model>(
    model: &M,
    o: &M::State,
    ns: &[usize],
    factors: &[f64],
    reps: usize,
    seed: u64,
    workers: usize,
) -> RunResult<Vec<TestReport>> {
    let h = model.harmonic();
    let h_o = h.eval(o);
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    let maxima = replicate(seed, reps, workers, |_, stream| {
        let mut cur = o.clone();
        let mut top = f64::NEG_INFINITY;
        let mut n = 0;
        let mut out = Vec::with_capacity(ns.len());
        for &g in &ns {
            while n < g {
                cur = model.kernel().sample(&cur, stream)?;
                n += 1;
                top = top.max(h.eval(&cur));
            }
            out.push(top);
        }
        Ok(out)
    })?;
    let mut reports = Vec::new();
    for (j, &n) in ns.iter().enumerate() {
        for &c in factors {
            let lambda = c * h_o;
            let est = maxima.iter().filter(|m| above_level(m[j], lambda)).count() as f64 / reps as f64;
            let bound = h_o / lambda;
            reports.push(
                TestReport::at_most(
                    format!("doob/{}/n={n}/lambda={c}h(o)", model.name()),
                    "P(max h ≥ λ)",
                    est,
                    bound + 3.0 * sigma(bound.min(1.0), reps),
                )
                .with_seed(seed)
                .with_sizes(vec![reps]),
            );
        }
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// tree algebra

fn q_tilde_recurrence(r: u8, n: i64) -> Ratio<i128> {
    let rr = Ratio::from_integer(r as i128);
    let up = Ratio::one() / rr;
    let down = Ratio::from_integer(r as i128 - 1) / rr;
    up * tree_q_tilde_exact(r, n + 1) + down * tree_q_tilde_exact(r, n - 1) - tree_q_tilde_exact(r, n)
}

fn q_star_recurrence(r: u8, i: i64) -> Ratio<i128> {
    let rr = Ratio::from_integer(r as i128);
    let up = Ratio::from_integer(r as i128 - 1) / rr;
    let down = Ratio::one() / rr;
    up * tree_q_star_tilde_exact(r, i + 1) + down * tree_q_star_tilde_exact(r, i - 1) - tree_q_star_tilde_exact(r, i)
}

/// Recurrences and boundary values of `q̃`, `q̃*` in exact arithmetic, and
/// the boundary-mixture identity for all short words.
pub fn check_tree_algebra(rs: std::ops::RangeInclusive<u8>, span: i64, mixture_r: std::ops::RangeInclusive<u8>, mixture_len: usize) -> RunResult<Vec<TestReport>> {
    let mut violations = Vec::new();
    let mut checked = 0usize;
    for r in rs.clone() {
        for k in -span..=span {
            checked += 1;
            let q = tree_q_tilde_exact(r, k);
            let qs = tree_q_star_tilde_exact(r, k);
            let ok_q = if k <= 0 { q_tilde_recurrence(r, k).is_zero() } else { q.is_zero() };
            let ok_qs = if k >= 1 { q_star_recurrence(r, k).is_zero() } else { qs.is_zero() };
            if !ok_q {
                violations.push(format!("q̃ r={r} n={k}"));
            }
            if !ok_qs {
                violations.push(format!("q̃* r={r} i={k}"));
            }
        }
        if tree_q_tilde_exact(r, 0) != Ratio::one() {
            violations.push(format!("q̃(0) ≠ 1 for r={r}"));
        }
        if tree_q_star_tilde_exact(r, 1) != Ratio::from_integer(r as i128 - 2) {
            violations.push(format!("q̃*(1) ≠ r−2 for r={r}"));
        }
    }
    let algebra = TestReport::at_most(
        format!("tree-algebra/r={}..={}/k=±{span}", rs.start(), rs.end()),
        "recurrence or boundary violations (exact)",
        violations.len() as f64,
        0.0,
    )
    .with_sizes(vec![checked])
    .with_detail(violations.join(", "));

    let mut nonzero = Vec::new();
    let mut words = 0usize;
    for r in mixture_r.clone() {
        let tree = TreeWalk::standard(r)?;
        for x in tree.words_up_to(mixture_len) {
            words += 1;
            let res = boundary_mixture_check(r, &x)?;
            if !res.exact.is_zero() || res.float > EXACT_TOL {
                nonzero.push(format!("r={r} x={}", x.encode()));
            }
        }
    }
    let mixture = TestReport::at_most(
        format!("boundary-mixture/r={}..={}/|x|≤{mixture_len}", mixture_r.start(), mixture_r.end()),
        "words with nonzero residual",
        nonzero.len() as f64,
        0.0,
    )
    .with_sizes(vec![words])
    .with_detail(nonzero.join(", "));
    Ok(vec![algebra, mixture])
}

// ---------------------------------------------------------------------------
// samplers

/// `P(sup h ≥ λ)` from exact (or censored) supremum samples against oracle
/// values `(λ, p)`, each within 3σ.
#[allow(clippy::too_many_arguments)]
pub fn check_sup_sample<M: Model>(
    model: &M,
    o: &M::State,
    oracle: &[(f64, f64)],
    reps: usize,
    censor: Option<f64>,
    max_steps: usize,
    seed: u64,
    workers: usize,
) -> RunResult<Vec<TestReport>> {
    if let Some(c) = censor {
        if oracle.iter().any(|(l, _)| !below_level(*l, c)) {
            return Err(RunError::Config("every level must lie at or below the censoring level".into()));
        }
    }
    let values = replicate(seed, reps, workers, |_, stream| {
        Ok(match censor {
            Some(c) => censored_sup_sample(model, o, c, max_steps, stream)?.value,
            None => exact_sup_sample(model, o, max_steps, stream)?.value,
        })
    })?;
    Ok(oracle
        .iter()
        .map(|&(lambda, p)| {
            let est = values.iter().filter(|v| above_level(**v, lambda)).count() as f64 / reps as f64;
            TestReport::at_most(
                format!("sup-sample/{}/lambda={lambda}", model.name()),
                "|P̂(sup h ≥ λ) − oracle|",
                (est - p).abs(),
                3.0 * sigma(p, reps),
            )
            .with_seed(seed)
            .with_sizes(vec![reps])
            .with_detail(format!("estimate {est:.5}, oracle {p:.5}"))
        })
        .collect())
}

/// Chi-square of max-decomposition prefixes against the exact `P`-law.
pub fn check_theorem2_law<M: Model>(model: &M, o: &M::State, n: usize, reps: usize, alpha: f64, seed: u64, workers: usize) -> RunResult<TestReport> {
    let opts = SamplerOptions::default();
    let paths = replicate(seed, reps, workers, |_, stream| {
        let s = theorem2_sample(model, o, n, &opts, stream)?;
        Ok(s.path[1..].to_vec())
    })?;
    let law = path_law(model.kernel(), o, n)?;
    Ok(two_sample_chi2(&format!("theorem2-law/{}/n={n}", model.name()), &count(paths), Reference::Law(&law), alpha)?.with_seed(seed))
}

/// Chi-square of dual-decomposition prefixes against the `P^h`-law.
pub fn check_theorem3_law<M: Model>(model: &M, o: &M::State, n: usize, reps: usize, alpha: f64, seed: u64, workers: usize) -> RunResult<TestReport> {
    let opts = SamplerOptions::default();
    let paths = replicate(seed, reps, workers, |_, stream| {
        let s = theorem3_sample(model, o, n, &opts, stream)?;
        Ok(s.path[1..].to_vec())
    })?;
    let law = transformed_prefix_law(model.kernel(), model.harmonic(), o, n)?;
    Ok(two_sample_chi2(&format!("theorem3-law/{}/n={n}", model.name()), &count(paths), Reference::Law(&law), alpha)?.with_seed(seed))
}
