//! Exact enumeration of the split laws on both sides of the decompositions.
//!
//! The *direct* tables come from the original chain: a `P`-path (a
//! `P^h`-path in the dual) weighted by the probability that its future keeps
//! the extremum where the record pattern says it is. The *constructed*
//! tables come from the sampler's recipe: transformed steps up to the split,
//! conditioned steps after it, times the probability of the level bracket
//! that makes that index the split. The two are computed from different
//! closed forms, so agreement is a genuine check.

use std::collections::BTreeMap;

use pathsplit_core::chain::{enumerate_paths, law_distance, path_law, transformed_prefix_law, DEFAULT_PATH_CAP};
use pathsplit_core::conditioning::conditioned_kernel;
use pathsplit_core::{ChainError, Harmonic, Model, PathLaw, Result, State};

use super::report::TestReport;

/// Tolerance for identities between exactly enumerated laws.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SplitIndex {
    At(usize),
    /// The split lies beyond the horizon.
    Tail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitLawTable<S> {
    pub horizon: usize,
    pub index: SplitIndex,
    pub law: PathLaw<S>,
}

impl<S: Ord> SplitLawTable<S> {
    pub fn total(&self) -> f64 {
        self.law.values().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Max,
    Min,
}

/// Index `m` is the first time of the extremum over `0..=n`: strict before,
/// non-strict after. Index 0 takes part.
fn record_pattern(hv: &[f64], m: usize, ext: Extremum) -> bool {
    let hm = hv[m];
    hv.iter().enumerate().all(|(i, &v)| match (ext, i.cmp(&m)) {
        (_, std::cmp::Ordering::Equal) => true,
        (Extremum::Max, std::cmp::Ordering::Less) => v < hm,
        (Extremum::Max, std::cmp::Ordering::Greater) => v <= hm,
        (Extremum::Min, std::cmp::Ordering::Less) => v > hm,
        (Extremum::Min, std::cmp::Ordering::Greater) => v >= hm,
    })
}

/// Index `m` is a strict record of the prefix `0..=m`.
fn strict_record(hv: &[f64], ext: Extremum) -> bool {
    let (last, rest) = hv.split_last().expect("non-empty");
    rest.iter().all(|&v| match ext {
        Extremum::Max => v < *last,
        Extremum::Min => v > *last,
    })
}

fn h_values<H: Harmonic>(h: &H, o: &H::State, path: &[H::State]) -> Vec<f64> {
    std::iter::once(o).chain(path.iter()).map(|x| h.eval(x)).collect()
}

fn missing(what: &str, model: &str) -> ChainError {
    ChainError::Unsupported(format!("{model} has no closed-form {what}"))
}

fn check_index(index: SplitIndex, n: usize) -> Result<()> {
    match index {
        SplitIndex::At(m) if m > n => Err(ChainError::Precondition(format!(
            "split index {m} exceeds the horizon {n}"
        ))),
        _ => Ok(()),
    }
}

fn add<S: Ord>(law: &mut PathLaw<S>, path: Vec<S>, w: f64) {
    if w > 0.0 {
        *law.entry(path).or_insert(0.0) += w;
    }
}

/// `P_o((X_1..X_n) ∈ ·, τ = m)` with `τ` the first time of the global
/// maximum of `h(X)`, or the tail `τ > n`.
pub fn direct_split_law<M: Model>(model: &M, o: &M::State, n: usize, index: SplitIndex) -> Result<SplitLawTable<M::State>> {
    check_index(index, n)?;
    let h = model.harmonic();
    let mut law = PathLaw::new();
    for (path, prob) in enumerate_paths(model.kernel(), o, n, DEFAULT_PATH_CAP)? {
        let hv = h_values(h, o, &path);
        let end = path.last().unwrap_or(o);
        let w = match index {
            SplitIndex::At(m) => {
                if !record_pattern(&hv, m, Extremum::Max) {
                    continue;
                }
                let q = model
                    .survival_below(hv[m])
                    .ok_or_else(|| missing("stay-below survival", model.name()))?;
                prob * q.probability(end)
            }
            SplitIndex::Tail => {
                let top = hv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prob * model
                    .crossing_probability(end, top)
                    .ok_or_else(|| missing("crossing probability", model.name()))?
            }
        };
        add(&mut law, path, w);
    }
    Ok(SplitLawTable { horizon: n, index, law })
}

/// `P((X̄_1..X̄_n) ∈ ·, T = m)` from the construction: `P^h` to `m`, then
/// `Q_{h(x_m)}`, times `P(h(x_m) ≤ Y < h(X̂_σ))`.
pub fn constructed_split_law<M: Model>(
    model: &M,
    o: &M::State,
    n: usize,
    index: SplitIndex,
) -> Result<SplitLawTable<M::State>> {
    check_index(index, n)?;
    let h = model.harmonic();
    let h_o = h.eval(o);
    let mut law = PathLaw::new();
    let hat_len = match index {
        SplitIndex::At(m) => m,
        SplitIndex::Tail => n,
    };
    for (prefix, p_hat) in enumerate_paths(model.hat_kernel(), o, hat_len, DEFAULT_PATH_CAP)? {
        let hv = h_values(h, o, &prefix);
        let end = prefix.last().unwrap_or(o).clone();
        match index {
            SplitIndex::At(m) => {
                if !strict_record(&hv, Extremum::Max) {
                    continue;
                }
                let s = hv[m];
                let moment = model
                    .hat_crossing_moment(&end, s)
                    .ok_or_else(|| missing("crossing moment under P^h", model.name()))?;
                let bracket = h_o * (1.0 / s - moment);
                if !(bracket > 0.0) {
                    continue;
                }
                let q = model
                    .survival_below(s)
                    .ok_or_else(|| missing("stay-below survival", model.name()))?;
                let check = conditioned_kernel(model.kernel(), h, q);
                for (suffix, p_check) in enumerate_paths(&check, &end, n - m, DEFAULT_PATH_CAP)? {
                    let mut path = prefix.clone();
                    path.extend(suffix);
                    add(&mut law, path, p_hat * p_check * bracket);
                }
            }
            SplitIndex::Tail => {
                let top = hv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let moment = model
                    .hat_crossing_moment(&end, top)
                    .ok_or_else(|| missing("crossing moment under P^h", model.name()))?;
                add(&mut law, prefix, p_hat * h_o * moment);
            }
        }
    }
    Ok(SplitLawTable { horizon: n, index, law })
}

/// Dual direct side: a `P^h`-path with its first minimum at `m`, weighted
/// by `P^h_{x_n}(h stays ≥ h(x_m))`; the tail by `P^h_{x_n}(σ*_{min} < ∞)`.
pub fn direct_dual_law<M: Model>(model: &M, o: &M::State, n: usize, index: SplitIndex) -> Result<SplitLawTable<M::State>> {
    check_index(index, n)?;
    let h = model.harmonic();
    let mut law = PathLaw::new();
    for (path, prob) in enumerate_paths(model.hat_kernel(), o, n, DEFAULT_PATH_CAP)? {
        let hv = h_values(h, o, &path);
        let end = path.last().unwrap_or(o);
        let w = match index {
            SplitIndex::At(m) => {
                if !record_pattern(&hv, m, Extremum::Min) {
                    continue;
                }
                let q = model
                    .survival_above(hv[m])
                    .ok_or_else(|| missing("stay-above survival", model.name()))?;
                prob * q.probability(end)
            }
            SplitIndex::Tail => {
                let bottom = hv.iter().copied().fold(f64::INFINITY, f64::min);
                prob * model
                    .hat_undershoot_probability(end, bottom)
                    .ok_or_else(|| missing("undershoot probability under P^h", model.name()))?
            }
        };
        add(&mut law, path, w);
    }
    Ok(SplitLawTable { horizon: n, index, law })
}

/// Dual constructed side: `P` to `m`, then `Q*_{h(x_m)}`, times
/// `P(h(X_σ*) < U ≤ h(x_m))` with `U` uniform on `(0, h(o))`.
pub fn constructed_dual_law<M: Model>(
    model: &M,
    o: &M::State,
    n: usize,
    index: SplitIndex,
) -> Result<SplitLawTable<M::State>> {
    check_index(index, n)?;
    let h = model.harmonic();
    let h_o = h.eval(o);
    let mut law = PathLaw::new();
    let len = match index {
        SplitIndex::At(m) => m,
        SplitIndex::Tail => n,
    };
    for (prefix, p) in enumerate_paths(model.kernel(), o, len, DEFAULT_PATH_CAP)? {
        let hv = h_values(h, o, &prefix);
        let end = prefix.last().unwrap_or(o).clone();
        match index {
            SplitIndex::At(m) => {
                if !strict_record(&hv, Extremum::Min) {
                    continue;
                }
                let s = hv[m];
                let moment = model
                    .undershoot_moment(&end, s)
                    .ok_or_else(|| missing("undershoot moment", model.name()))?;
                let bracket = (s - moment) / h_o;
                if !(bracket > 0.0) {
                    continue;
                }
                let q = model
                    .survival_above(s)
                    .ok_or_else(|| missing("stay-above survival", model.name()))?;
                let hat = conditioned_kernel(model.hat_kernel(), h, q);
                for (suffix, p_hat) in enumerate_paths(&hat, &end, n - m, DEFAULT_PATH_CAP)? {
                    let mut path = prefix.clone();
                    path.extend(suffix);
                    add(&mut law, path, p * p_hat * bracket);
                }
            }
            SplitIndex::Tail => {
                let bottom = hv.iter().copied().fold(f64::INFINITY, f64::min);
                let moment = model
                    .undershoot_moment(&end, bottom)
                    .ok_or_else(|| missing("undershoot moment", model.name()))?;
                add(&mut law, prefix, p * moment / h_o);
            }
        }
    }
    Ok(SplitLawTable { horizon: n, index, law })
}

fn indices(n: usize) -> impl Iterator<Item = SplitIndex> {
    (0..=n).map(SplitIndex::At).chain(std::iter::once(SplitIndex::Tail))
}

fn accumulate<S: Ord + Clone>(total: &mut PathLaw<S>, table: &SplitLawTable<S>) {
    for (k, v) in &table.law {
        *total.entry(k.clone()).or_insert(0.0) += v;
    }
}

/// Entrywise comparison of both sides for every split index, plus the
/// reconstruction of the full path law from each side.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub per_index: BTreeMap<SplitIndex, f64>,
    pub direct_total: f64,
    pub constructed_total: f64,
}

impl IdentityCheck {
    pub fn split_error(&self) -> f64 {
        self.per_index.values().copied().fold(0.0, f64::max)
    }

    pub fn total_error(&self) -> f64 {
        self.direct_total.max(self.constructed_total)
    }
}

pub fn split_identity_errors<M: Model>(model: &M, o: &M::State, n: usize) -> Result<IdentityCheck> {
    let reference = path_law(model.kernel(), o, n)?;
    let mut per_index = BTreeMap::new();
    let mut direct_sum = PathLaw::new();
    let mut constructed_sum = PathLaw::new();
    for index in indices(n) {
        let d = direct_split_law(model, o, n, index)?;
        let c = constructed_split_law(model, o, n, index)?;
        per_index.insert(index, law_distance(&d.law, &c.law));
        accumulate(&mut direct_sum, &d);
        accumulate(&mut constructed_sum, &c);
    }
    Ok(IdentityCheck {
        per_index,
        direct_total: law_distance(&direct_sum, &reference),
        constructed_total: law_distance(&constructed_sum, &reference),
    })
}

pub fn dual_identity_errors<M: Model>(model: &M, o: &M::State, n: usize) -> Result<IdentityCheck> {
    let reference = transformed_prefix_law(model.kernel(), model.harmonic(), o, n)?;
    let mut per_index = BTreeMap::new();
    let mut direct_sum = PathLaw::new();
    let mut constructed_sum = PathLaw::new();
    for index in indices(n) {
        let d = direct_dual_law(model, o, n, index)?;
        let c = constructed_dual_law(model, o, n, index)?;
        per_index.insert(index, law_distance(&d.law, &c.law));
        accumulate(&mut direct_sum, &d);
        accumulate(&mut constructed_sum, &c);
    }
    Ok(IdentityCheck {
        per_index,
        direct_total: law_distance(&direct_sum, &reference),
        constructed_total: law_distance(&constructed_sum, &reference),
    })
}

/// Split identity for every `m ≤ n` and the tail, at [`EXACT_TOL`].
pub fn check_split_identities<M: Model>(model: &M, o: &M::State, n: usize) -> Result<TestReport> {
    let c = split_identity_errors(model, o, n)?;
    Ok(TestReport::at_most(
        format!("split-identity/{}/o={}/n={n}", model.name(), o.encode()),
        "max entrywise |direct − constructed|",
        c.split_error(),
        EXACT_TOL,
    ))
}

/// Summed split laws against the unconditional `P`-path law.
pub fn check_total_law<M: Model>(model: &M, o: &M::State, n: usize) -> Result<TestReport> {
    let c = split_identity_errors(model, o, n)?;
    Ok(TestReport::at_most(
        format!("total-law/{}/o={}/n={n}", model.name(), o.encode()),
        "max entrywise |Σ split laws − P-law|",
        c.total_error(),
        EXACT_TOL,
    ))
}

/// Dual split identity and reconstruction of the `P^h`-path law.
pub fn check_dual_total_law<M: Model>(model: &M, o: &M::State, n: usize) -> Result<TestReport> {
    let c = dual_identity_errors(model, o, n)?;
    Ok(TestReport::at_most(
        format!("dual-total-law/{}/o={}/n={n}", model.name(), o.encode()),
        "max entrywise error (dual split identity and P^h-law reconstruction)",
        c.split_error().max(c.total_error()),
        EXACT_TOL,
    ))
}
