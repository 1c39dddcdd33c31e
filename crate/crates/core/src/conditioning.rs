//! Survival weights `q_s`, `q*_s` and the conditioned kernels built from them.
//!
//! A stay-below weight at level `s` is (a multiple of) the probability that
//! the `P`-chain keeps `h ≤ s` forever; a stay-above weight is the
//! probability that the `P^h`-chain keeps `h ≥ s` forever. Only ratios of a
//! weight enter the conditioned kernel, so weights are stored unnormalized:
//! `eval(x) = λ · probability(x)` for a model-declared `λ > 0`. Values above
//! one are therefore legitimate.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::chain::{Exactness, Harmonic, Kernel, State};
use crate::error::{ChainError, Result};
use crate::stream::{fnv1a, SeededStream};

/// Relative slack applied to level comparisons, so that `h(x) = s`
/// computed along two routes still counts as a tie.
pub const LEVEL_RTOL: f64 = 1e-12;

/// `value ≤ s` up to [`LEVEL_RTOL`]. Ties belong to `S_s`.
pub fn below_level(value: f64, level: f64) -> bool {
    value <= level + LEVEL_RTOL * libm::fabs(level)
}

/// `value ≥ s` up to [`LEVEL_RTOL`].
pub fn above_level(value: f64, level: f64) -> bool {
    value >= level - LEVEL_RTOL * libm::fabs(level)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `h ≤ s` under `P`.
    StayBelow,
    /// `h ≥ s` under `P^h`.
    StayAbove,
}

impl Direction {
    pub fn contains(self, h_value: f64, level: f64) -> bool {
        match self {
            Direction::StayBelow => below_level(h_value, level),
            Direction::StayAbove => above_level(h_value, level),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurvivalKind {
    ClosedForm,
    McEstimate { horizon: usize, reps: usize },
}

type WeightFn<S> = Arc<dyn Fn(&S) -> f64 + Send + Sync>;

/// An unnormalized survival weight at a fixed level.
#[derive(Clone)]
pub struct SurvivalWeight<S> {
    level: f64,
    direction: Direction,
    kind: SurvivalKind,
    normalization: f64,
    eval: WeightFn<S>,
}

impl<S> core::fmt::Debug for SurvivalWeight<S> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SurvivalWeight")
            .field("level", &self.level)
            .field("direction", &self.direction)
            .field("kind", &self.kind)
            .field("normalization", &self.normalization)
            .finish()
    }
}

impl<S: State> SurvivalWeight<S> {
    /// A closed-form weight with `eval = normalization · probability`.
    pub fn closed_form<F>(level: f64, direction: Direction, normalization: f64, eval: F) -> Self
    where
        F: Fn(&S) -> f64 + Send + Sync + 'static,
    {
        Self {
            level,
            direction,
            kind: SurvivalKind::ClosedForm,
            normalization,
            eval: Arc::new(eval),
        }
    }

    /// A weight evaluated lazily by truncated Monte Carlo at each state.
    ///
    /// Every state gets its own stream, derived from `seed` and the state's
    /// encoding, so repeated evaluations agree.
    pub fn monte_carlo<K, H>(
        kernel: K,
        harmonic: H,
        level: f64,
        direction: Direction,
        horizon: usize,
        reps: usize,
        seed: u64,
    ) -> Self
    where
        K: Kernel<State = S> + Send + Sync + 'static,
        H: Harmonic<State = S> + Send + Sync + 'static,
    {
        let eval = move |x: &S| {
            let mut stream = SeededStream::new(seed, fnv1a(x.encode().as_bytes()));
            mc_survival_estimate(
                &kernel,
                &harmonic,
                level,
                direction,
                x,
                horizon,
                reps,
                &mut stream,
            )
            .map(|e| e.value)
            .unwrap_or(0.0)
        };
        Self {
            level,
            direction,
            kind: SurvivalKind::McEstimate { horizon, reps },
            normalization: 1.0,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, x: &S) -> f64 {
        (self.eval)(x)
    }

    /// The survival probability itself, `eval / λ`.
    pub fn probability(&self, x: &S) -> f64 {
        self.eval(x) / self.normalization
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn kind(&self) -> SurvivalKind {
        self.kind
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn exactness(&self) -> Exactness {
        match self.kind {
            SurvivalKind::ClosedForm => Exactness::Exact,
            SurvivalKind::McEstimate { .. } => Exactness::Approximate,
        }
    }

    pub fn contains(&self, h_value: f64) -> bool {
        self.direction.contains(h_value, self.level)
    }
}

/// `σ_s = inf{i ≥ 0 : h(X_i) > s}` on a finite trace; `None` if the trace
/// never crosses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingTime {
    pub index: Option<usize>,
    pub level: f64,
}

pub fn crossing_time(h_values: &[f64], level: f64) -> CrossingTime {
    CrossingTime {
        index: h_values.iter().position(|&v| !below_level(v, level)),
        level,
    }
}

/// The kernel `Q(x, dy) = P(x, dy) q(y) / q(x)` restricted to the
/// conditioning set of `q`.
#[derive(Debug, Clone)]
pub struct Conditioned<K: Kernel, H> {
    kernel: K,
    harmonic: H,
    weight: SurvivalWeight<K::State>,
}

/// Condition `kernel` on staying inside the set described by `weight`.
///
/// Pass `P` with a stay-below weight or `P^h` with a stay-above weight.
pub fn conditioned_kernel<K, H>(
    kernel: K,
    harmonic: H,
    weight: SurvivalWeight<K::State>,
) -> Conditioned<K, H>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    Conditioned {
        kernel,
        harmonic,
        weight,
    }
}

impl<K, H> Conditioned<K, H>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    pub fn weight(&self) -> &SurvivalWeight<K::State> {
        &self.weight
    }
}

impl<K, H> Kernel for Conditioned<K, H>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    type State = K::State;

    fn step_law(&self, x: &Self::State) -> Result<Vec<(Self::State, f64)>> {
        let qx = self.weight.eval(x);
        if !(qx > 0.0) {
            return Err(ChainError::ConditioningDegenerate { state: x.encode() });
        }
        let mut row: Vec<(Self::State, f64)> = self
            .kernel
            .step_law(x)?
            .into_iter()
            .filter(|(y, _)| self.weight.contains(self.harmonic.eval(y)))
            .filter_map(|(y, p)| {
                let w = p * self.weight.eval(&y) / qx;
                (w > 0.0).then_some((y, w))
            })
            .collect();
        if self.weight.exactness() == Exactness::Approximate {
            // Estimated weights are not exactly harmonic; renormalize the row.
            let total: f64 = row.iter().map(|(_, w)| w).sum();
            if !(total > 0.0) {
                return Err(ChainError::ConditioningDegenerate { state: x.encode() });
            }
            for entry in &mut row {
                entry.1 /= total;
            }
        }
        Ok(row)
    }

    fn exactness(&self) -> Exactness {
        self.kernel.exactness().and(self.weight.exactness())
    }
}

/// A truncated Monte Carlo survival estimate at a single state.
///
/// Truncation only ever overestimates survival: a run that has not left the
/// set within `horizon` steps is counted as a survivor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub halfwidth: f64,
    pub horizon: usize,
    pub reps: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn mc_survival_estimate<K, H>(
    kernel: &K,
    harmonic: &H,
    level: f64,
    direction: Direction,
    x: &K::State,
    horizon: usize,
    reps: usize,
    stream: &mut SeededStream,
) -> Result<McEstimate>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    if horizon == 0 || reps == 0 {
        return Err(ChainError::Precondition(
            "horizon and reps must be at least 1".into(),
        ));
    }
    if !direction.contains(harmonic.eval(x), level) {
        return Err(ChainError::Precondition(alloc::format!(
            "start state {} lies outside the conditioning set at level {level}",
            x.encode()
        )));
    }
    let mut survivors = 0usize;
    for _ in 0..reps {
        let mut current = x.clone();
        let mut alive = true;
        for _ in 0..horizon {
            current = kernel.sample(&current, stream)?;
            if !direction.contains(harmonic.eval(&current), level) {
                alive = false;
                break;
            }
        }
        if alive {
            survivors += 1;
        }
    }
    let value = survivors as f64 / reps as f64;
    let std_error = libm::sqrt(value * (1.0 - value) / reps as f64);
    Ok(McEstimate {
        value,
        std_error,
        halfwidth: 1.96 * std_error,
        horizon,
        reps,
    })
}

/// Restricted-harmonicity residuals of a survival weight:
/// `|Σ_{y ∈ S_s} K(x,y) q(y) − q(x)|` over states inside the set.
#[derive(Debug, Clone)]
pub struct SurvivalReport {
    pub max_residual: f64,
    pub checked: usize,
    pub worst_state: Option<String>,
}

pub fn validate_survival<K, H>(
    kernel: &K,
    harmonic: &H,
    weight: &SurvivalWeight<K::State>,
    states: &[K::State],
) -> Result<SurvivalReport>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    let mut max_residual: f64 = 0.0;
    let mut checked = 0;
    let mut worst_state = None;
    for x in states {
        if !weight.contains(harmonic.eval(x)) {
            continue;
        }
        checked += 1;
        let mean: f64 = kernel
            .step_law(x)?
            .into_iter()
            .filter(|(y, _)| weight.contains(harmonic.eval(y)))
            .map(|(y, p)| p * weight.eval(&y))
            .sum();
        let r = libm::fabs(mean - weight.eval(x));
        if r > max_residual {
            max_residual = r;
            worst_state = Some(x.encode());
        }
    }
    Ok(SurvivalReport {
        max_residual,
        checked,
        worst_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn ties_belong_to_the_set() {
        assert!(below_level(4.0, 4.0));
        assert!(above_level(4.0, 4.0));
        assert!(!below_level(4.0 + 1e-6, 4.0));
    }

    #[test]
    fn crossing_is_strict() {
        let c = crossing_time(&[1.0, 2.0, 4.0, 5.0], 4.0);
        assert_eq!(c.index, Some(3));
        assert_eq!(crossing_time(&[1.0, 2.0], 4.0).index, None);
    }

    #[derive(Clone)]
    struct Walk;

    impl Kernel for Walk {
        type State = i64;
        fn step_law(&self, x: &i64) -> Result<Vec<(i64, f64)>> {
            Ok(vec![(x + 1, 1.0 / 3.0), (x - 1, 2.0 / 3.0)])
        }
    }

    #[derive(Clone)]
    struct Position;

    impl Harmonic for Position {
        type State = i64;
        fn eval(&self, x: &i64) -> f64 {
            libm::pow(2.0, *x as f64)
        }
        fn sup_value(&self) -> f64 {
            f64::INFINITY
        }
        fn name(&self) -> &str {
            "2^x"
        }
    }

    fn ruin_weight(m: i64) -> SurvivalWeight<i64> {
        SurvivalWeight::closed_form(libm::pow(2.0, m as f64), Direction::StayBelow, 1.0, move |x: &i64| {
            if *x > m {
                0.0
            } else {
                1.0 - libm::pow(0.5, (m - x + 1) as f64)
            }
        })
    }

    #[test]
    fn degenerate_weight_is_reported() {
        let q = ruin_weight(2);
        let k = conditioned_kernel(Walk, Position, q);
        assert!(matches!(
            k.step_law(&3),
            Err(ChainError::ConditioningDegenerate { .. })
        ));
    }

    #[test]
    fn mc_estimate_rejects_start_outside() {
        let mut s = SeededStream::new(0, 0);
        let err = mc_survival_estimate(&Walk, &Position, 4.0, Direction::StayBelow, &3, 10, 10, &mut s);
        assert!(matches!(err, Err(ChainError::Precondition(_))));
    }

    #[test]
    fn mc_estimate_is_one_when_level_unreachable() {
        struct Bounded;
        impl Harmonic for Bounded {
            type State = i64;
            fn eval(&self, _x: &i64) -> f64 {
                0.5
            }
            fn sup_value(&self) -> f64 {
                0.5
            }
            fn name(&self) -> &str {
                "half"
            }
        }
        let mut s = SeededStream::new(0, 0);
        let est = mc_survival_estimate(&Walk, &Bounded, 0.5, Direction::StayBelow, &0, 50, 100, &mut s).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.halfwidth, 0.0);
    }

    #[test]
    fn closed_form_ruin_weight_is_restricted_harmonic() {
        let q = ruin_weight(2);
        let states: Vec<i64> = (-10..=5).collect();
        let report = validate_survival(&Walk, &Position, &q, &states).unwrap();
        assert!(report.max_residual < 1e-12, "{report:?}");
        assert_eq!(report.checked, 13);
    }
}
