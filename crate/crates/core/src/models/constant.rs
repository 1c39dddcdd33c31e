//! Wrap any kernel with `h ≡ 1`. Both decompositions degenerate: the
//! transform is the kernel itself and the splitting index is always 0.

use alloc::string::String;
use alloc::vec::Vec;

use crate::chain::{Kernel, State, Unit};
use crate::conditioning::{above_level, below_level, Direction, SurvivalWeight};
use crate::decomposition::{Classification, DetectabilityClass};
use crate::error::{ChainError, Result};
use crate::model::Model;
use super::WalkKernel;

#[derive(Debug, Clone)]
pub struct ConstantModel<K: Kernel> {
    name: String,
    kernel: K,
    harmonic: Unit<K::State>,
    origin: K::State,
    test_states: Vec<K::State>,
}

impl<K: Kernel> ConstantModel<K> {
    pub fn new(name: &str, kernel: K, origin: K::State, test_states: Vec<K::State>) -> Self {
        Self {
            name: name.into(),
            kernel,
            harmonic: Unit::new(),
            origin,
            test_states,
        }
    }
}

impl ConstantModel<WalkKernel> {
    /// The nearest-neighbour walk on ℤ with up-probability `p` and `h ≡ 1`.
    pub fn walk(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ChainError::Precondition(alloc::format!(
                "up-probability must lie in (0, 1), got {p}"
            )));
        }
        Ok(Self::new("constant-h", WalkKernel { up: p }, 0, (-6..=6).collect()))
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl<K> Model for ConstantModel<K>
where
    K: Kernel + Clone + Send + Sync + 'static,
    K::State: State,
{
    type State = K::State;
    type Kernel = K;
    type HatKernel = K;
    type Harmonic = Unit<K::State>;

    fn name(&self) -> &str {
        &self.name
    }

    fn origin(&self) -> K::State {
        self.origin.clone()
    }

    fn kernel(&self) -> &K {
        &self.kernel
    }

    fn hat_kernel(&self) -> &K {
        &self.kernel
    }

    fn harmonic(&self) -> &Unit<K::State> {
        &self.harmonic
    }

    fn detectability(&self) -> Classification {
        Classification {
            class: DetectabilityClass::SupDetectable,
            justification: "h(o) = sup h, so the supremum is attained at time 0 and T = 0",
        }
    }

    fn dual_detectability(&self) -> Classification {
        Classification {
            class: DetectabilityClass::SupDetectable,
            justification: "h(o) = inf h, so the infimum is attained at time 0 and T* = 0",
        }
    }

    fn survival_below(&self, level: f64) -> Option<SurvivalWeight<K::State>> {
        let v = indicator(below_level(1.0, level));
        Some(SurvivalWeight::closed_form(level, Direction::StayBelow, 1.0, move |_| v))
    }

    fn survival_above(&self, level: f64) -> Option<SurvivalWeight<K::State>> {
        let v = indicator(above_level(1.0, level));
        Some(SurvivalWeight::closed_form(level, Direction::StayAbove, 1.0, move |_| v))
    }

    fn crossing_probability(&self, _x: &K::State, level: f64) -> Option<f64> {
        Some(indicator(!below_level(1.0, level)))
    }

    fn hat_crossing_moment(&self, _x: &K::State, level: f64) -> Option<f64> {
        Some(indicator(!below_level(1.0, level)))
    }

    fn hat_undershoot_probability(&self, _x: &K::State, level: f64) -> Option<f64> {
        Some(indicator(!above_level(1.0, level)))
    }

    fn undershoot_moment(&self, _x: &K::State, level: f64) -> Option<f64> {
        Some(indicator(!above_level(1.0, level)))
    }

    fn test_states(&self) -> Vec<K::State> {
        self.test_states.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Harmonic;

    #[test]
    fn degenerate_quantities() {
        let m = ConstantModel::walk(0.3).unwrap();
        assert_eq!(m.harmonic().eval(&5), 1.0);
        assert_eq!(m.survival_below(1.5).unwrap().eval(&0), 1.0);
        assert_eq!(m.survival_below(1.0).unwrap().eval(&0), 1.0);
        assert_eq!(m.survival_above(0.5).unwrap().eval(&0), 1.0);
        assert_eq!(m.crossing_probability(&0, 2.0), Some(0.0));
        assert_eq!(m.hat_undershoot_probability(&0, 0.4), Some(0.0));
        assert!(ConstantModel::walk(1.0).is_err());
    }
}
