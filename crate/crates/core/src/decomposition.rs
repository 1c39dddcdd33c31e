//! Splitting a chain at the global maximum (and, dually, minimum) of
//! `h(X_n)`.
//!
//! [`theorem2_sample`] draws a level `Y` with `P(Y > y) = h(o)/y`, runs the
//! `P^h`-chain until `h` first exceeds `Y`, takes the last strict record
//! below `Y` as the splitting index `T`, and continues from `X̂_T` with `P`
//! conditioned to keep `h ≤ h(X̂_T)`. The concatenation is a `P`-chain.
//!
//! [`theorem3_sample`] is the mirror image: a uniform level `U` on
//! `(0, h(o))`, a `P`-chain run until `h` drops below `U`, the last strict
//! low record `T*`, and a `P^h`-chain conditioned to keep `h ≥ h(X̌*_{T*})`.
//! The concatenation is a `P^h`-chain.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::chain::{Exactness, Harmonic, Kernel, State};
use crate::conditioning::{
    above_level, below_level, conditioned_kernel, Direction, SurvivalWeight,
};
use crate::error::{ChainError, Result};
use crate::model::Model;
use crate::stream::SeededStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectabilityClass {
    /// `sup_n h(X_n) = ∞` under `P^h`: the crossing time detects `T`.
    CrossingDetectable,
    /// `sup_n h(X_n) = sup h` under `P^h`: detected by `τ_c ∧ τ̂`.
    SupDetectable,
    /// No stopping time detects `T`.
    Undetectable,
}

impl DetectabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectabilityClass::CrossingDetectable => "crossing-detectable",
            DetectabilityClass::SupDetectable => "sup-detectable",
            DetectabilityClass::Undetectable => "undetectable",
        }
    }
}

/// A declared detectability class and the reason it holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub class: DetectabilityClass,
    pub justification: &'static str,
}

pub fn classify_detectability<M: Model>(model: &M) -> Classification {
    model.detectability()
}

/// How far the detection run may go.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Run to the class's stopping index; only for detectable models.
    Exact,
    /// Stop after `horizon` steps and tag the output approximate.
    Truncated { horizon: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    pub policy: Policy,
    /// Safety cap on the detection run under [`Policy::Exact`].
    pub max_steps: usize,
    /// Monte Carlo fallback for models without closed-form survivals.
    pub mc_horizon: usize,
    pub mc_reps: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            policy: Policy::Exact,
            max_steps: 10_000_000,
            mc_horizon: 200,
            mc_reps: 200,
        }
    }
}

impl SamplerOptions {
    pub fn truncated(horizon: usize) -> Self {
        Self {
            policy: Policy::Truncated { horizon },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Before the splitting index: the `P^h` part (`X̌*` in the dual).
    Hat,
    /// From the splitting index on: the conditioned part.
    Check,
}

/// `Y = h(o)/u`.
pub fn level_y_from_uniform(h_o: f64, u: f64) -> f64 {
    h_o / u
}

/// Draw `Y` with `P(Y > y) = h(o)/y` for `y > h(o)`. Consumes one variate.
pub fn sample_level_y(h_o: f64, stream: &mut SeededStream) -> f64 {
    level_y_from_uniform(h_o, stream.uniform())
}

/// `U = h(o)·u`.
pub fn level_u_from_uniform(h_o: f64, u: f64) -> f64 {
    h_o * u
}

/// Draw `U` uniform on `(0, h(o))`. Consumes one variate.
pub fn sample_level_u(h_o: f64, stream: &mut SeededStream) -> f64 {
    level_u_from_uniform(h_o, stream.uniform())
}

/// Result of locating the splitting index on an h-trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitDetection {
    /// `T`, or `None` for the `T = ∞` case.
    pub t: Option<usize>,
    /// First index with `h > Y`, if observed.
    pub tau_c: Option<usize>,
    /// First index with `h = sup h`, if observed and relevant.
    pub tau_hat: Option<usize>,
    /// Whether the trace ran out before the class's stopping index.
    pub truncated: bool,
}

/// Locate `T` from the h-values along `X̂` and the level `Y`.
///
/// Index 0 is always a record. Under [`DetectabilityClass::CrossingDetectable`]
/// the trace must reach `τ_c`; under `SupDetectable` it must reach
/// `τ_c ∧ τ̂`. Under `Undetectable` the whole trace is used and the result
/// is marked truncated unless `τ_c` was observed.
pub fn detect_split(
    h_values: &[f64],
    level: f64,
    class: DetectabilityClass,
    sup_h: f64,
) -> Result<SplitDetection> {
    let mut tracker = RecordTracker::new(level, class, sup_h, Extremum::Max);
    for &v in h_values {
        if tracker.push(v) {
            break;
        }
    }
    let det = tracker.finish();
    if det.truncated && class != DetectabilityClass::Undetectable {
        return Err(ChainError::InsufficientTrace {
            len: h_values.len(),
        });
    }
    Ok(det)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Max,
    Min,
}

/// Online record keeping for both decompositions.
struct RecordTracker {
    level: f64,
    class: DetectabilityClass,
    extreme_h: f64,
    direction: Extremum,
    best: f64,
    t: Option<usize>,
    tau_c: Option<usize>,
    tau_hat: Option<usize>,
    index: usize,
}

impl RecordTracker {
    fn new(level: f64, class: DetectabilityClass, extreme_h: f64, direction: Extremum) -> Self {
        let best = match direction {
            Extremum::Max => f64::NEG_INFINITY,
            Extremum::Min => f64::INFINITY,
        };
        Self {
            level,
            class,
            extreme_h,
            direction,
            best,
            t: None,
            tau_c: None,
            tau_hat: None,
            index: 0,
        }
    }

    /// Feed the next h-value; returns `true` once detection is complete.
    fn push(&mut self, v: f64) -> bool {
        let i = self.index;
        self.index += 1;
        let (crossed, record, at_extreme) = match self.direction {
            Extremum::Max => (
                !below_level(v, self.level),
                v > self.best,
                above_level(v, self.extreme_h),
            ),
            Extremum::Min => (
                !above_level(v, self.level),
                v < self.best,
                below_level(v, self.extreme_h),
            ),
        };
        if crossed {
            self.tau_c = Some(i);
            return true;
        }
        if record {
            self.best = v;
            self.t = Some(i);
        }
        if self.class == DetectabilityClass::SupDetectable && at_extreme {
            self.tau_hat = Some(i);
            return true;
        }
        false
    }

    fn done(&self) -> bool {
        self.tau_c.is_some() || self.tau_hat.is_some()
    }

    fn finish(&self) -> SplitDetection {
        SplitDetection {
            t: self.t,
            tau_c: self.tau_c,
            tau_hat: self.tau_hat,
            truncated: !self.done(),
        }
    }
}

/// One realization of the max-decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionSample<S> {
    /// The level `Y > h(o)`.
    pub level: f64,
    /// Splitting index `T`; `None` means `T = ∞`.
    pub t: Option<usize>,
    /// Crossing index `τ_c`; `None` if not observed.
    pub tau_c: Option<usize>,
    /// `X̄_0, …, X̄_n`.
    pub path: Vec<S>,
    pub labels: Vec<Phase>,
    /// Value `h(X̂_T)`.
    pub split_value: f64,
    pub approximate: bool,
    /// Number of `P^h` steps taken by the detection run.
    pub detection_steps: usize,
}

/// One realization of the dual (min) decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDecompositionSample<S> {
    /// The level `U ∈ (0, h(o))`.
    pub level: f64,
    pub t: Option<usize>,
    pub tau_c: Option<usize>,
    pub path: Vec<S>,
    pub labels: Vec<Phase>,
    pub split_value: f64,
    pub approximate: bool,
    pub detection_steps: usize,
}

/// Violations of the sample invariants, for test and debug use.
pub fn check_sample_invariants<S, H>(sample: &DecompositionSample<S>, h: &H) -> Result<()>
where
    S: State,
    H: Harmonic<State = S>,
{
    let fail = |msg: &str| Err(ChainError::Precondition(msg.to_string()));
    let hv: Vec<f64> = sample.path.iter().map(|x| h.eval(x)).collect();
    if !(sample.level > hv[0]) {
        return fail("Y must exceed h(o)");
    }
    if let Some(t) = sample.t {
        if let Some(tc) = sample.tau_c {
            if t >= tc {
                return fail("T must precede the crossing index");
            }
        }
        if t < hv.len() {
            let top = hv[t];
            if !below_level(top, sample.level) {
                return fail("h(X_T) must not exceed Y");
            }
            for (j, &v) in hv.iter().enumerate() {
                if j < t && !(v < top) {
                    return fail("h before T must be strictly below h(X_T)");
                }
                if j > t && !below_level(v, top) {
                    return fail("check phase must stay below h(X_T)");
                }
            }
        }
    }
    Ok(())
}

pub fn check_dual_invariants<S, H>(sample: &DualDecompositionSample<S>, h: &H) -> Result<()>
where
    S: State,
    H: Harmonic<State = S>,
{
    let fail = |msg: &str| Err(ChainError::Precondition(msg.to_string()));
    let hv: Vec<f64> = sample.path.iter().map(|x| h.eval(x)).collect();
    if !(sample.level > 0.0 && sample.level < hv[0]) {
        return fail("U must lie in (0, h(o))");
    }
    if let Some(t) = sample.t {
        if let Some(tc) = sample.tau_c {
            if t >= tc {
                return fail("T* must precede the crossing index");
            }
        }
        if t < hv.len() {
            let bottom = hv[t];
            if !above_level(bottom, sample.level) {
                return fail("h(X_T*) must be at least U");
            }
            for (j, &v) in hv.iter().enumerate() {
                if j < t && !(v > bottom) {
                    return fail("h before T* must be strictly above h(X_T*)");
                }
                if j > t && !above_level(v, bottom) {
                    return fail("conditioned phase must stay above h(X_T*)");
                }
            }
        }
    }
    Ok(())
}

struct DetectionRun<S> {
    states: Vec<S>,
    detection: SplitDetection,
}

/// Run `kernel` from `o` under the record tracker until detection, the
/// truncation horizon, or (if `min_len` demands it) at least `min_len`
/// states are available.
#[allow(clippy::too_many_arguments)]
fn detection_run<K, H>(
    kernel: &K,
    h: &H,
    o: &K::State,
    level: f64,
    class: DetectabilityClass,
    extreme_h: f64,
    direction: Extremum,
    opts: &SamplerOptions,
    stream: &mut SeededStream,
) -> Result<DetectionRun<K::State>>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    let mut tracker = RecordTracker::new(level, class, extreme_h, direction);
    let mut states = alloc::vec![o.clone()];
    let limit = match opts.policy {
        Policy::Exact => opts.max_steps,
        Policy::Truncated { horizon } => horizon,
    };
    loop {
        let current = states.last().expect("non-empty");
        if tracker.push(h.eval(current)) {
            break;
        }
        if states.len() > limit {
            if opts.policy == Policy::Exact {
                return Err(ChainError::InsufficientTrace { len: states.len() });
            }
            break;
        }
        let next = kernel.sample(current, stream)?;
        states.push(next);
    }
    Ok(DetectionRun {
        states,
        detection: tracker.finish(),
    })
}

fn extend_with<K: Kernel>(
    kernel: &K,
    path: &mut Vec<K::State>,
    steps: usize,
    stream: &mut SeededStream,
) -> Result<()> {
    for _ in 0..steps {
        let next = kernel.sample(path.last().expect("non-empty"), stream)?;
        path.push(next);
    }
    Ok(())
}

fn require_policy(class: Classification, opts: &SamplerOptions) -> Result<()> {
    if class.class == DetectabilityClass::Undetectable && opts.policy == Policy::Exact {
        return Err(ChainError::Unsupported(alloc::format!(
            "splitting time is undetectable ({}); use a truncated policy",
            class.justification
        )));
    }
    Ok(())
}

/// Sample `X̄_0..X̄_n` by the max-decomposition.
pub fn theorem2_sample<M: Model>(
    model: &M,
    o: &M::State,
    n: usize,
    opts: &SamplerOptions,
    stream: &mut SeededStream,
) -> Result<DecompositionSample<M::State>> {
    let h = model.harmonic();
    let class = model.detectability();
    require_policy(class, opts)?;
    let h_o = h.eval(o);
    if !(h_o > 0.0) {
        return Err(ChainError::Domain { state: o.encode() });
    }
    let level = sample_level_y(h_o, stream);
    let run = detection_run(
        model.hat_kernel(),
        h,
        o,
        level,
        class.class,
        h.sup_value(),
        Extremum::Max,
        opts,
        stream,
    )?;
    let mut approximate =
        run.detection.truncated || model.hat_kernel().exactness() == Exactness::Approximate;
    let detection_steps = run.states.len() - 1;
    let mut hat = run.states;
    let t = run.detection.t;
    let split_value = t.map_or(f64::INFINITY, |t| h.eval(&hat[t]));

    let path = match t {
        Some(t) if t <= n => {
            hat.truncate(t + 1);
            let weight = match model.survival_below(split_value) {
                Some(w) => w,
                None => SurvivalWeight::monte_carlo(
                    model.kernel().clone(),
                    h.clone(),
                    split_value,
                    Direction::StayBelow,
                    opts.mc_horizon,
                    opts.mc_reps,
                    stream.next_u64(),
                ),
            };
            let check = conditioned_kernel(model.kernel(), h, weight);
            approximate |= check.exactness() == Exactness::Approximate;
            extend_with(&check, &mut hat, n - t, stream)?;
            hat
        }
        _ => {
            if hat.len() < n + 1 {
                let missing = n + 1 - hat.len();
                extend_with(model.hat_kernel(), &mut hat, missing, stream)?;
            }
            hat.truncate(n + 1);
            hat
        }
    };
    let labels = (0..=n)
        .map(|i| match t {
            Some(t) if i >= t => Phase::Check,
            _ => Phase::Hat,
        })
        .collect();
    Ok(DecompositionSample {
        level,
        t,
        tau_c: run.detection.tau_c,
        path,
        labels,
        split_value,
        approximate,
        detection_steps,
    })
}

/// Sample `X̄*_0..X̄*_n` by the dual decomposition; the result is a
/// `P^h`-chain from `o`.
pub fn theorem3_sample<M: Model>(
    model: &M,
    o: &M::State,
    n: usize,
    opts: &SamplerOptions,
    stream: &mut SeededStream,
) -> Result<DualDecompositionSample<M::State>> {
    let h = model.harmonic();
    let class = model.dual_detectability();
    require_policy(class, opts)?;
    let h_o = h.eval(o);
    if !(h_o > 0.0) {
        return Err(ChainError::Domain { state: o.encode() });
    }
    let level = sample_level_u(h_o, stream);
    let run = detection_run(
        model.kernel(),
        h,
        o,
        level,
        class.class,
        h.inf_value(),
        Extremum::Min,
        opts,
        stream,
    )?;
    let mut approximate =
        run.detection.truncated || model.kernel().exactness() == Exactness::Approximate;
    let detection_steps = run.states.len() - 1;
    let mut check = run.states;
    let t = run.detection.t;
    let split_value = t.map_or(0.0, |t| h.eval(&check[t]));

    let path = match t {
        Some(t) if t <= n => {
            check.truncate(t + 1);
            let weight = match model.survival_above(split_value) {
                Some(w) => w,
                None => SurvivalWeight::monte_carlo(
                    model.hat_kernel().clone(),
                    h.clone(),
                    split_value,
                    Direction::StayAbove,
                    opts.mc_horizon,
                    opts.mc_reps,
                    stream.next_u64(),
                ),
            };
            let hat = conditioned_kernel(model.hat_kernel(), h, weight);
            approximate |= hat.exactness() == Exactness::Approximate;
            extend_with(&hat, &mut check, n - t, stream)?;
            check
        }
        _ => {
            if check.len() < n + 1 {
                let missing = n + 1 - check.len();
                extend_with(model.kernel(), &mut check, missing, stream)?;
            }
            check.truncate(n + 1);
            check
        }
    };
    let labels = (0..=n)
        .map(|i| match t {
            Some(t) if i >= t => Phase::Hat,
            _ => Phase::Check,
        })
        .collect();
    Ok(DualDecompositionSample {
        level,
        t,
        tau_c: run.detection.tau_c,
        path,
        labels,
        split_value,
        approximate,
        detection_steps,
    })
}

/// A draw of `h(X̂_T)`, equal in law to `sup_n h(X_n)` under `P_o`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupSample {
    pub value: f64,
    pub level: f64,
    pub t: usize,
    pub tau_c: Option<usize>,
}

pub fn exact_sup_sample<M: Model>(
    model: &M,
    o: &M::State,
    max_steps: usize,
    stream: &mut SeededStream,
) -> Result<SupSample> {
    let class = model.detectability();
    if class.class == DetectabilityClass::Undetectable {
        return Err(ChainError::Unsupported(alloc::format!(
            "exact supremum sampling needs a detectable splitting time ({})",
            class.justification
        )));
    }
    let h = model.harmonic();
    let h_o = h.eval(o);
    if !(h_o > 0.0) {
        return Err(ChainError::Domain { state: o.encode() });
    }
    let level = sample_level_y(h_o, stream);
    let opts = SamplerOptions {
        max_steps,
        ..SamplerOptions::default()
    };
    let run = detection_run(
        model.hat_kernel(),
        h,
        o,
        level,
        class.class,
        h.sup_value(),
        Extremum::Max,
        &opts,
        stream,
    )?;
    let t = run.detection.t.expect("index 0 is always a record");
    Ok(SupSample {
        value: h.eval(&run.states[t]),
        level,
        t,
        tau_c: run.detection.tau_c,
    })
}

/// `min(sup_n h(X_n), c)` in law, plus whether the cap was hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoredSup {
    /// `h(X̂_T)` when `censored` is false, else a lower bound `≥ c` for it.
    pub value: f64,
    pub level: f64,
    pub censored: bool,
    pub steps: usize,
}

/// Like [`exact_sup_sample`] but stops as soon as a record at or above
/// `censor` is seen below the level. Every event `{sup ≥ λ}` with
/// `λ ≤ censor` is decided exactly, and the run length stays bounded even
/// when the detection time of `T` has infinite mean.
pub fn censored_sup_sample<M: Model>(
    model: &M,
    o: &M::State,
    censor: f64,
    max_steps: usize,
    stream: &mut SeededStream,
) -> Result<CensoredSup> {
    let class = model.detectability();
    if class.class == DetectabilityClass::Undetectable {
        return Err(ChainError::Unsupported(alloc::format!(
            "exact supremum sampling needs a detectable splitting time ({})",
            class.justification
        )));
    }
    let h = model.harmonic();
    let h_o = h.eval(o);
    if !(h_o > 0.0) {
        return Err(ChainError::Domain { state: o.encode() });
    }
    let level = sample_level_y(h_o, stream);
    let sup_h = h.sup_value();
    let mut best = h_o;
    let mut x = o.clone();
    let mut steps = 0;
    loop {
        if above_level(best, censor) {
            return Ok(CensoredSup { value: best, level, censored: true, steps });
        }
        if class.class == DetectabilityClass::SupDetectable && above_level(best, sup_h) {
            return Ok(CensoredSup { value: best, level, censored: false, steps });
        }
        if steps == max_steps {
            return Err(ChainError::InsufficientTrace { len: steps + 1 });
        }
        x = model.hat_kernel().sample(&x, stream)?;
        steps += 1;
        let v = h.eval(&x);
        if !below_level(v, level) {
            return Ok(CensoredSup { value: best, level, censored: false, steps });
        }
        if v > best {
            best = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_cdf_levels() {
        assert_eq!(level_y_from_uniform(1.0, 0.25), 4.0);
        assert_eq!(level_u_from_uniform(1.0, 0.25), 0.25);
    }

    #[test]
    fn hand_traced_split() {
        let det = detect_split(
            &[1.0, 2.0, 1.5, 3.0, 5.0],
            4.0,
            DetectabilityClass::CrossingDetectable,
            f64::INFINITY,
        )
        .unwrap();
        assert_eq!(det.tau_c, Some(4));
        assert_eq!(det.t, Some(3));
    }

    #[test]
    fn immediate_crossing_splits_at_zero() {
        let det = detect_split(&[1.0, 9.0], 4.0, DetectabilityClass::CrossingDetectable, f64::INFINITY)
            .unwrap();
        assert_eq!(det.tau_c, Some(1));
        assert_eq!(det.t, Some(0));
    }

    #[test]
    fn sup_detection_without_crossing() {
        let hv = [0.2, 0.3, 0.25, 0.5, 0.6, 0.4, 0.7, 1.0, 0.9];
        let det = detect_split(&hv, 2.0, DetectabilityClass::SupDetectable, 1.0).unwrap();
        assert_eq!(det.tau_c, None);
        assert_eq!(det.tau_hat, Some(7));
        assert_eq!(det.t, Some(7));
    }

    #[test]
    fn short_trace_is_an_error() {
        let err = detect_split(&[1.0, 2.0, 3.0], 4.0, DetectabilityClass::CrossingDetectable, f64::INFINITY);
        assert_eq!(err, Err(ChainError::InsufficientTrace { len: 3 }));
        let ok = detect_split(&[1.0, 2.0, 3.0], 4.0, DetectabilityClass::Undetectable, 1.0).unwrap();
        assert!(ok.truncated);
        assert_eq!(ok.t, Some(2));
    }

    #[test]
    fn equal_values_are_not_records() {
        let det = detect_split(&[1.0, 2.0, 2.0, 5.0], 4.0, DetectabilityClass::CrossingDetectable, f64::INFINITY)
            .unwrap();
        assert_eq!(det.t, Some(1));
    }

    #[test]
    fn censored_sup_stops_at_cap() {
        use crate::models::{AbsorbedWalk, ConstantModel};
        let m = ConstantModel::walk(0.4).unwrap();
        let mut stream = SeededStream::new(3, 0);
        let c = censored_sup_sample(&m, &0, 5.0, 10, &mut stream).unwrap();
        assert_eq!((c.value, c.censored, c.steps), (1.0, false, 0));
        let a = AbsorbedWalk::new();
        let c = censored_sup_sample(&a, &0, 1.0, 10, &mut stream).unwrap();
        assert!(c.censored && c.value == 1.0 && c.steps == 0);
        for k in 0..200 {
            let mut s = SeededStream::new(9, k);
            let c = censored_sup_sample(&a, &0, 4.0, 1_000_000, &mut s).unwrap();
            assert!(c.value <= 4.0);
            if !c.censored {
                assert!(c.value <= c.level && c.value == c.value.floor());
            }
        }
    }
}
