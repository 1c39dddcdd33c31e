use alloc::vec;
use alloc::vec::Vec;

use super::{ceil_exponent, floor_exponent};
use crate::chain::{Harmonic, Kernel};
use crate::conditioning::{Direction, SurvivalWeight};
use crate::decomposition::{Classification, DetectabilityClass};
use crate::error::{ChainError, Result};
use crate::model::Model;
use crate::stream::SeededStream;

/// Nearest-neighbour walk on ℤ: `+1` with probability `up`, else `−1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkKernel {
    pub up: f64,
}

impl Kernel for WalkKernel {
    type State = i64;

    fn step_law(&self, x: &i64) -> Result<Vec<(i64, f64)>> {
        Ok(vec![(x + 1, self.up), (x - 1, 1.0 - self.up)])
    }

    fn sample(&self, x: &i64, stream: &mut SeededStream) -> Result<i64> {
        Ok(if stream.uniform() < self.up { x + 1 } else { x - 1 })
    }
}

/// `h(x) = ρ^{σx}` with `ρ > 1` and orientation `σ = ±1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpHarmonic {
    pub rho: f64,
    pub orientation: i64,
}

impl ExpHarmonic {
    /// The level coordinate `z = σx`, in which `h = ρ^z` increases.
    pub fn level_coordinate(&self, x: i64) -> i64 {
        self.orientation * x
    }
}

impl Harmonic for ExpHarmonic {
    type State = i64;

    fn eval(&self, x: &i64) -> f64 {
        libm::pow(self.rho, self.level_coordinate(*x) as f64)
    }

    fn sup_value(&self) -> f64 {
        f64::INFINITY
    }

    fn name(&self) -> &str {
        "h_u"
    }
}

/// Simple walk on ℤ with drift, `h_u(x) = ((1−p)/p)^x`.
///
/// For `p < 1/2` the walk drifts down and `h` increases in `x`. For
/// `p > 1/2` the same formula gives a decreasing `h`; all closed forms are
/// written in the level coordinate `z = σx` with `σ = −1`, which maps the
/// model onto the canonical `p < 1/2` case with `P` and `P^h` swapped.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftedWalk {
    p: f64,
    kernel: WalkKernel,
    hat: WalkKernel,
    harmonic: ExpHarmonic,
}

impl DriftedWalk {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ChainError::Precondition(alloc::format!(
                "up-probability {p} must lie in (0, 1)"
            )));
        }
        if p == 0.5 {
            return Err(ChainError::Precondition(
                "p = 1/2 has no nontrivial exponential harmonic function; use the absorbed walk".into(),
            ));
        }
        let q = 1.0 - p;
        let (orientation, rho) = if p < 0.5 { (1, q / p) } else { (-1, p / q) };
        Ok(Self {
            p,
            kernel: WalkKernel { up: p },
            hat: WalkKernel { up: q },
            harmonic: ExpHarmonic { rho, orientation },
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `u = log((1−p)/p)`, the nonzero root of `φ(u) = p e^u + (1−p) e^{−u} = 1`.
    pub fn exponent(&self) -> f64 {
        libm::log((1.0 - self.p) / self.p)
    }

    /// Moment generating function of one step, `φ(u)`.
    pub fn phi(&self, u: f64) -> f64 {
        self.p * libm::exp(u) + (1.0 - self.p) * libm::exp(-u)
    }

    /// `ρ > 1`, the base of `h` in level coordinates.
    pub fn ratio(&self) -> f64 {
        self.harmonic.rho
    }

    /// `P_0(sup_n z_n ≥ k) = ρ^{−k}` in level coordinates.
    pub fn prob_max_at_least(&self, k: i64) -> f64 {
        if k <= 0 {
            1.0
        } else {
            libm::pow(self.harmonic.rho, -(k as f64))
        }
    }

    fn z(&self, x: i64) -> i64 {
        self.harmonic.level_coordinate(x)
    }

    fn rho_pow(&self, k: i64) -> f64 {
        libm::pow(self.harmonic.rho, k as f64)
    }
}

impl Model for DriftedWalk {
    type State = i64;
    type Kernel = WalkKernel;
    type HatKernel = WalkKernel;
    type Harmonic = ExpHarmonic;

    fn name(&self) -> &str {
        "drifted-walk"
    }

    fn origin(&self) -> i64 {
        0
    }

    fn kernel(&self) -> &WalkKernel {
        &self.kernel
    }

    fn hat_kernel(&self) -> &WalkKernel {
        &self.hat
    }

    fn harmonic(&self) -> &ExpHarmonic {
        &self.harmonic
    }

    fn detectability(&self) -> Classification {
        Classification {
            class: DetectabilityClass::CrossingDetectable,
            justification: "the transformed walk drifts toward increasing h, so sup_n h = ∞ and T < τ_c < ∞ a.s.",
        }
    }

    fn dual_detectability(&self) -> Classification {
        Classification {
            class: DetectabilityClass::CrossingDetectable,
            justification: "the walk drifts toward decreasing h, so inf_n h = 0 and T* < τ*_c < ∞ a.s.",
        }
    }

    fn is_minimal(&self) -> bool {
        true
    }

    fn survival_below(&self, level: f64) -> Option<SurvivalWeight<i64>> {
        let m = floor_exponent(self.harmonic.rho, level);
        let this = self.clone();
        Some(SurvivalWeight::closed_form(level, Direction::StayBelow, 1.0, move |x: &i64| {
            let z = this.z(*x);
            if z > m { 0.0 } else { 1.0 - this.rho_pow(-(m - z + 1)) }
        }))
    }

    fn survival_above(&self, level: f64) -> Option<SurvivalWeight<i64>> {
        let floor = ceil_exponent(self.harmonic.rho, level);
        let this = self.clone();
        Some(SurvivalWeight::closed_form(level, Direction::StayAbove, 1.0, move |x: &i64| {
            let z = this.z(*x);
            if z < floor { 0.0 } else { 1.0 - this.rho_pow(-(z - floor + 1)) }
        }))
    }

    fn crossing_probability(&self, x: &i64, level: f64) -> Option<f64> {
        let m = floor_exponent(self.harmonic.rho, level);
        let z = self.z(*x);
        Some(if z > m { 1.0 } else { self.rho_pow(-(m + 1 - z)) })
    }

    fn hat_crossing_moment(&self, x: &i64, level: f64) -> Option<f64> {
        let m = floor_exponent(self.harmonic.rho, level);
        let z = self.z(*x);
        Some(if z > m { self.rho_pow(-z) } else { self.rho_pow(-(m + 1)) })
    }

    fn hat_undershoot_probability(&self, x: &i64, level: f64) -> Option<f64> {
        let floor = ceil_exponent(self.harmonic.rho, level);
        let z = self.z(*x);
        Some(if z < floor { 1.0 } else { self.rho_pow(-(z - floor + 1)) })
    }

    fn undershoot_moment(&self, x: &i64, level: f64) -> Option<f64> {
        let floor = ceil_exponent(self.harmonic.rho, level);
        let z = self.z(*x);
        Some(if z < floor { self.rho_pow(z) } else { self.rho_pow(floor - 1) })
    }

    fn test_states(&self) -> Vec<i64> {
        (-12..=12).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{check_harmonic, h_transform, HARMONIC_TOL};
    use crate::conditioning::conditioned_kernel;

    fn third() -> DriftedWalk {
        DriftedWalk::new(1.0 / 3.0).unwrap()
    }

    #[test]
    fn rejects_fair_and_out_of_range() {
        assert!(DriftedWalk::new(0.5).is_err());
        assert!(DriftedWalk::new(1.5).is_err());
        assert!(DriftedWalk::new(0.0).is_err());
    }

    #[test]
    fn exponent_solves_mgf_equation() {
        let w = third();
        assert!((w.exponent() - libm::log(2.0)).abs() < 1e-15);
        assert!((w.phi(w.exponent()) - 1.0).abs() < 1e-15);
        assert_eq!(w.phi(0.0), 1.0);
    }

    #[test]
    fn harmonic_on_grid() {
        for p in [0.1, 1.0 / 3.0, 0.45, 0.7, 0.9] {
            let w = DriftedWalk::new(p).unwrap();
            let states = w.test_states();
            let r = check_harmonic(w.kernel(), w.harmonic(), &states, HARMONIC_TOL).unwrap();
            // residuals scale with h; compare relative to the largest value
            let scale = states.iter().map(|x| w.harmonic().eval(x)).fold(0.0, f64::max);
            assert!(r.max_residual <= HARMONIC_TOL * scale.max(1.0), "p={p}: {}", r.max_residual);
        }
    }

    #[test]
    fn transform_is_the_flipped_walk() {
        for p in [0.2, 1.0 / 3.0, 0.8] {
            let w = DriftedWalk::new(p).unwrap();
            let ph = h_transform(*w.kernel(), *w.harmonic());
            for x in -5..5 {
                let a = ph.step_law(&x).unwrap();
                let b = w.hat_kernel().step_law(&x).unwrap();
                for ((ya, pa), (yb, pb)) in a.iter().zip(b.iter()) {
                    assert_eq!(ya, yb);
                    assert!((pa - pb).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn survival_at_origin() {
        let w = third();
        let q = w.survival_below(4.0).unwrap();
        assert!((q.eval(&0) - 7.0 / 8.0).abs() < 1e-15);
        assert!((q.eval(&1) - 3.0 / 4.0).abs() < 1e-15);
        assert!((q.eval(&2) - 1.0 / 2.0).abs() < 1e-15);
        assert_eq!(q.eval(&3), 0.0);
    }

    #[test]
    fn conditioned_steps() {
        let w = third();
        let q = w.survival_below(4.0).unwrap();
        let k = conditioned_kernel(*w.kernel(), *w.harmonic(), q);
        let row = k.step_law(&1).unwrap();
        assert!((row[0].1 - 2.0 / 9.0).abs() < 1e-15);
        assert!((row[1].1 - 7.0 / 9.0).abs() < 1e-15);
        let boundary = k.step_law(&2).unwrap();
        assert_eq!(boundary.len(), 1);
        assert_eq!(boundary[0].0, 1);
        assert!((boundary[0].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dual_survival_at_floor_is_one_half() {
        let w = third();
        let floor_level = 8.0;
        let q = w.survival_above(floor_level).unwrap();
        assert!((q.eval(&3) - 0.5).abs() < 1e-15);
        assert_eq!(q.eval(&2), 0.0);
    }

    #[test]
    fn crossing_relations_hold() {
        // P_x(σ_s < ∞) = h(x) E^h_x[1/h(X_σ)] and its dual.
        for p in [0.25, 0.75] {
            let w = DriftedWalk::new(p).unwrap();
            for x in -4..4 {
                for s in [0.3, 1.0, 2.5, 9.0] {
                    let hx = w.harmonic().eval(&x);
                    let lhs = w.crossing_probability(&x, s).unwrap();
                    let rhs = hx * w.hat_crossing_moment(&x, s).unwrap();
                    assert!((lhs - rhs).abs() < 1e-12);
                    let lhs = w.hat_undershoot_probability(&x, s).unwrap();
                    let rhs = w.undershoot_moment(&x, s).unwrap() / hx;
                    assert!((lhs - rhs).abs() < 1e-12);
                }
            }
        }
    }
}
