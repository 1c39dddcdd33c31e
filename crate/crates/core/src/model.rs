use alloc::vec::Vec;

use crate::chain::{Harmonic, Kernel, State};
use crate::conditioning::SurvivalWeight;
use crate::decomposition::Classification;

/// A model family bundling `P`, a harmonic `h`, the closed form of `P^h`,
/// and whatever closed-form survival and crossing quantities are known.
///
/// Optional quantities default to `None`; exact verification suites skip
/// or reject models that do not provide what they need.
pub trait Model: Send + Sync {
    type State: State;
    type Kernel: Kernel<State = Self::State> + Clone + Send + Sync + 'static;
    type HatKernel: Kernel<State = Self::State> + Clone + Send + Sync + 'static;
    type Harmonic: Harmonic<State = Self::State> + Clone + Send + Sync + 'static;

    fn name(&self) -> &str;

    /// The canonical start state `o`.
    fn origin(&self) -> Self::State;

    /// `P`.
    fn kernel(&self) -> &Self::Kernel;

    /// The closed form of `P^h`.
    fn hat_kernel(&self) -> &Self::HatKernel;

    fn harmonic(&self) -> &Self::Harmonic;

    /// Detectability of the splitting time of the max-decomposition.
    fn detectability(&self) -> Classification;

    /// Detectability of the splitting time of the dual (min) decomposition.
    fn dual_detectability(&self) -> Classification;

    /// Whether `h` is a minimal harmonic function.
    fn is_minimal(&self) -> bool {
        false
    }

    /// `q_s` for `P`, stay-below.
    fn survival_below(&self, _level: f64) -> Option<SurvivalWeight<Self::State>> {
        None
    }

    /// `q*_s` for `P^h`, stay-above.
    fn survival_above(&self, _level: f64) -> Option<SurvivalWeight<Self::State>> {
        None
    }

    /// `P_x(σ_s < ∞)` with `σ_s = inf{i ≥ 0 : h(X_i) > s}`.
    fn crossing_probability(&self, _x: &Self::State, _level: f64) -> Option<f64> {
        None
    }

    /// `E^h_x[1/h(X_{σ_s}); σ_s < ∞]` under `P^h`.
    fn hat_crossing_moment(&self, _x: &Self::State, _level: f64) -> Option<f64> {
        None
    }

    /// `P^h_x(σ*_s < ∞)` with `σ*_s = inf{i ≥ 0 : h(X_i) < s}`.
    fn hat_undershoot_probability(&self, _x: &Self::State, _level: f64) -> Option<f64> {
        None
    }

    /// `E_x[h(X_{σ*_s}); σ*_s < ∞]` under `P`.
    fn undershoot_moment(&self, _x: &Self::State, _level: f64) -> Option<f64> {
        None
    }

    /// A finite grid of states on which harmonicity and survivals are checked.
    fn test_states(&self) -> Vec<Self::State>;
}
