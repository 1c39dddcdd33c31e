use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{Harmonic, Kernel, State};
use crate::conditioning::{above_level, below_level, Direction, SurvivalWeight};
use crate::decomposition::{Classification, DetectabilityClass};
use crate::error::{ChainError, Result};
use crate::model::Model;
use crate::stream::SeededStream;

/// Simple symmetric walk on ℤ, frozen on first entry into the negatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AbsorbedKernel;

impl Kernel for AbsorbedKernel {
    type State = i64;

    fn step_law(&self, x: &i64) -> Result<Vec<(i64, f64)>> {
        if *x < 0 {
            Ok(vec![(*x, 1.0)])
        } else {
            Ok(vec![(x + 1, 0.5), (x - 1, 0.5)])
        }
    }

    fn sample(&self, x: &i64, stream: &mut SeededStream) -> Result<i64> {
        let u = stream.uniform();
        if *x < 0 {
            Ok(*x)
        } else if u < 0.5 {
            Ok(x + 1)
        } else {
            Ok(x - 1)
        }
    }
}

/// The renewal function of the strict descending ladder heights, which for
/// the simple walk is `x + 1` on `x ≥ 0` and zero on the negatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RenewalHarmonic;

impl Harmonic for RenewalHarmonic {
    type State = i64;

    fn eval(&self, x: &i64) -> f64 {
        if *x < 0 { 0.0 } else { (*x + 1) as f64 }
    }

    fn sup_value(&self) -> f64 {
        f64::INFINITY
    }

    fn name(&self) -> &str {
        "renewal"
    }
}

/// The walk conditioned never to go negative:
/// `P^h(x, x+1) = (x+2)/(2(x+1))`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AbsorbedHatKernel;

impl Kernel for AbsorbedHatKernel {
    type State = i64;

    fn step_law(&self, x: &i64) -> Result<Vec<(i64, f64)>> {
        if *x < 0 {
            return Err(ChainError::Domain { state: x.encode() });
        }
        let up = (*x + 2) as f64 / (2 * (*x + 1)) as f64;
        if *x == 0 {
            Ok(vec![(1, 1.0)])
        } else {
            Ok(vec![(x + 1, up), (x - 1, 1.0 - up)])
        }
    }
}

/// Driftless simple walk absorbed in `(−∞, 0)`, with `h(x) = x + 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AbsorbedWalk {
    kernel: AbsorbedKernel,
    hat: AbsorbedHatKernel,
    harmonic: RenewalHarmonic,
}

impl AbsorbedWalk {
    pub fn new() -> Self {
        Self::default()
    }

    /// `P_0(reach k before −1) = 1/(k+1)`.
    pub fn prob_reach(&self, k: i64) -> f64 {
        1.0 / (k + 1) as f64
    }

    /// Largest position `m` with `h(m) = m + 1 ≤ s` (may be −1).
    fn top_position(level: f64) -> i64 {
        let mut m = libm::floor(level) as i64 - 1;
        while below_level((m + 2) as f64, level) {
            m += 1;
        }
        while m >= 0 && !below_level((m + 1) as f64, level) {
            m -= 1;
        }
        m.max(-1)
    }

    /// Smallest position `ℓ ≥ 0` with `h(ℓ) ≥ s`.
    fn floor_position(level: f64) -> i64 {
        let mut l = (libm::ceil(level) as i64 - 1).max(0);
        while l > 0 && above_level(l as f64, level) {
            l -= 1;
        }
        while !above_level((l + 1) as f64, level) {
            l += 1;
        }
        l
    }
}

impl Model for AbsorbedWalk {
    type State = i64;
    type Kernel = AbsorbedKernel;
    type HatKernel = AbsorbedHatKernel;
    type Harmonic = RenewalHarmonic;

    fn name(&self) -> &str {
        "absorbed-walk"
    }

    fn origin(&self) -> i64 {
        0
    }

    fn kernel(&self) -> &AbsorbedKernel {
        &self.kernel
    }

    fn hat_kernel(&self) -> &AbsorbedHatKernel {
        &self.hat
    }

    fn harmonic(&self) -> &RenewalHarmonic {
        &self.harmonic
    }

    fn detectability(&self) -> Classification {
        Classification {
            class: DetectabilityClass::CrossingDetectable,
            justification: "the walk conditioned to stay nonnegative is transient to +∞, so sup_n h = ∞",
        }
    }

    fn dual_detectability(&self) -> Classification {
        Classification {
            class: DetectabilityClass::CrossingDetectable,
            justification: "the recurrent walk is absorbed below zero a.s., where h = 0",
        }
    }

    fn survival_below(&self, level: f64) -> Option<SurvivalWeight<i64>> {
        let m = Self::top_position(level);
        Some(SurvivalWeight::closed_form(level, Direction::StayBelow, 1.0, move |x: &i64| {
            if *x < 0 {
                1.0
            } else if *x > m {
                0.0
            } else {
                (m + 1 - x) as f64 / (m + 2) as f64
            }
        }))
    }

    fn survival_above(&self, level: f64) -> Option<SurvivalWeight<i64>> {
        let l = Self::floor_position(level);
        Some(SurvivalWeight::closed_form(level, Direction::StayAbove, 1.0, move |x: &i64| {
            if *x < l { 0.0 } else { 1.0 - l as f64 / (x + 1) as f64 }
        }))
    }

    fn crossing_probability(&self, x: &i64, level: f64) -> Option<f64> {
        let m = Self::top_position(level);
        Some(if *x < 0 {
            if below_level(0.0, level) { 0.0 } else { 1.0 }
        } else if *x > m {
            1.0
        } else {
            (x + 1) as f64 / (m + 2) as f64
        })
    }

    fn hat_crossing_moment(&self, x: &i64, level: f64) -> Option<f64> {
        if *x < 0 {
            return None;
        }
        let m = Self::top_position(level);
        Some(if *x > m { 1.0 / (x + 1) as f64 } else { 1.0 / (m + 2) as f64 })
    }

    fn hat_undershoot_probability(&self, x: &i64, level: f64) -> Option<f64> {
        if *x < 0 {
            return None;
        }
        let l = Self::floor_position(level);
        Some(if *x < l { 1.0 } else { l as f64 / (x + 1) as f64 })
    }

    fn undershoot_moment(&self, x: &i64, level: f64) -> Option<f64> {
        let l = Self::floor_position(level);
        Some(if *x < l { self.harmonic.eval(x) } else { l as f64 })
    }

    fn test_states(&self) -> Vec<i64> {
        (-3..=20).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{check_harmonic, h_transform, HARMONIC_TOL};
    use crate::conditioning::validate_survival;

    #[test]
    fn harmonic_at_zero_by_direct_sum() {
        let w = AbsorbedWalk::new();
        let r = check_harmonic(w.kernel(), w.harmonic(), &[0], 0.0).unwrap();
        assert_eq!(r.max_residual, 0.0);
        let r = check_harmonic(w.kernel(), w.harmonic(), &w.test_states(), HARMONIC_TOL).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn hat_kernel_matches_generic_transform() {
        let w = AbsorbedWalk::new();
        let ph = h_transform(AbsorbedKernel, RenewalHarmonic);
        for x in 0..15 {
            let a = ph.step_law(&x).unwrap();
            let b = w.hat_kernel().step_law(&x).unwrap();
            assert_eq!(a.len(), b.len());
            for ((ya, pa), (yb, pb)) in a.iter().zip(b.iter()) {
                assert_eq!(ya, yb);
                assert!((pa - pb).abs() < 1e-15);
            }
        }
        assert!(w.hat_kernel().step_law(&-1).is_err());
    }

    #[test]
    fn absorbed_states_are_fixed() {
        let k = AbsorbedKernel;
        assert_eq!(k.step_law(&-1).unwrap(), vec![(-1, 1.0)]);
        assert_eq!(RenewalHarmonic.eval(&-1), 0.0);
    }

    #[test]
    fn survival_values() {
        let w = AbsorbedWalk::new();
        // stay at or below position 2 means h ≤ 3
        let q = w.survival_below(3.0).unwrap();
        assert!((q.eval(&0) - 0.75).abs() < 1e-15);
        assert_eq!(q.eval(&-1), 1.0);
        assert_eq!(q.eval(&3), 0.0);
        let qs = w.survival_above(1.0).unwrap();
        for x in 0..10 {
            assert_eq!(qs.eval(&x), 1.0);
        }
    }

    #[test]
    fn survivals_are_restricted_harmonic() {
        let w = AbsorbedWalk::new();
        let states = w.test_states();
        for s in [1.0, 2.0, 3.5, 7.0] {
            let q = w.survival_below(s).unwrap();
            let r = validate_survival(w.kernel(), w.harmonic(), &q, &states).unwrap();
            assert!(r.max_residual < 1e-12, "below {s}: {r:?}");
            let q = w.survival_above(s).unwrap();
            let pos: Vec<i64> = (0..=20).collect();
            let r = validate_survival(w.hat_kernel(), w.harmonic(), &q, &pos).unwrap();
            assert!(r.max_residual < 1e-12, "above {s}: {r:?}");
        }
    }

    #[test]
    fn level_positions() {
        assert_eq!(AbsorbedWalk::top_position(3.0), 2);
        assert_eq!(AbsorbedWalk::top_position(2.5), 1);
        assert_eq!(AbsorbedWalk::top_position(0.5), -1);
        assert_eq!(AbsorbedWalk::floor_position(3.0), 2);
        assert_eq!(AbsorbedWalk::floor_position(2.5), 2);
        assert_eq!(AbsorbedWalk::floor_position(0.4), 0);
    }
}
