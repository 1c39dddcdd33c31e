//! Drifted random walks on `ℤ^d` with exponential harmonic functions
//! `h_u(x) = e^{⟨u, x⟩}`, `u` on the characteristic surface `φ(u) = 1`.
//!
//! No closed-form survivals are known, so this family is sample-only.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::chain::{Harmonic, Kernel, State};
use crate::decomposition::{sample_level_y, Classification, DetectabilityClass};
use crate::error::{ChainError, Result};
use crate::model::Model;
use crate::stream::SeededStream;

const ROOT_TOL: f64 = 1e-10;
const ROOT_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn zero(d: usize) -> Self {
        LatticePoint(alloc::vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    fn shifted(&self, z: &[i64]) -> Self {
        LatticePoint(self.0.iter().zip(z).map(|(a, b)| a + b).collect())
    }
}

impl State for LatticePoint {
    fn encode(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|a| alloc::format!("{a}")).collect();
        parts.join(",")
    }

    fn decode(text: &str) -> Result<Self> {
        text.trim()
            .split(',')
            .map(|p| {
                p.trim().parse::<i64>().map_err(|_| ChainError::Codec {
                    input: text.into(),
                    reason: "expected comma-separated integers".into(),
                })
            })
            .collect::<Result<Vec<i64>>>()
            .map(LatticePoint)
    }
}

fn dot(a: &[f64], z: &[i64]) -> f64 {
    a.iter().zip(z).map(|(a, &b)| a * b as f64).sum()
}

type Increments = Arc<Vec<(Vec<i64>, f64)>>;

/// `P(x, x + z) = μ({z})` for a finite increment law.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeKernel {
    increments: Increments,
}

impl Kernel for LatticeKernel {
    type State = LatticePoint;

    fn step_law(&self, x: &LatticePoint) -> Result<Vec<(LatticePoint, f64)>> {
        if x.dim() != self.increments[0].0.len() {
            return Err(ChainError::Domain { state: x.encode() });
        }
        Ok(self.increments.iter().map(|(z, p)| (x.shifted(z), *p)).collect())
    }
}

/// `h_u(x) = e^{⟨u, x⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeHarmonic {
    pub u: Vec<f64>,
}

impl Harmonic for LatticeHarmonic {
    type State = LatticePoint;

    fn eval(&self, x: &LatticePoint) -> f64 {
        libm::exp(dot(&self.u, &x.0))
    }

    fn sup_value(&self) -> f64 {
        f64::INFINITY
    }

    fn name(&self) -> &str {
        "h_u"
    }
}

/// A drifted walk on `ℤ^d` together with its solved `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeWalk {
    kernel: LatticeKernel,
    hat: LatticeKernel,
    harmonic: LatticeHarmonic,
    mean: Vec<f64>,
}

impl LatticeWalk {
    /// Solve `φ(λ·dir) = 1` for the nonzero root `λ` and build the model.
    pub fn new(increments: Vec<(Vec<i64>, f64)>, direction: Vec<f64>) -> Result<Self> {
        let d = direction.len();
        if d == 0 || increments.is_empty() {
            return Err(ChainError::Precondition("empty increment law or direction".into()));
        }
        if increments.iter().any(|(z, p)| z.len() != d || !(*p > 0.0) || !p.is_finite()) {
            return Err(ChainError::Precondition(
                "increments must match the direction's dimension and carry positive mass".into(),
            ));
        }
        let total: f64 = increments.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ChainError::Precondition(alloc::format!(
                "increment law sums to {total}"
            )));
        }
        let norm = libm::sqrt(direction.iter().map(|a| a * a).sum::<f64>());
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(ChainError::Precondition("direction must be nonzero".into()));
        }
        let dir: Vec<f64> = direction.iter().map(|a| a / norm).collect();

        let mut mean = alloc::vec![0.0; d];
        for (z, p) in &increments {
            for (m, &zi) in mean.iter_mut().zip(z) {
                *m += p * zi as f64;
            }
        }
        if mean.iter().all(|m| *m == 0.0) {
            return Err(ChainError::Precondition("the increment law has zero mean".into()));
        }
        let slope = mean.iter().zip(&dir).map(|(m, a)| m * a).sum::<f64>();
        if slope == 0.0 {
            return Err(ChainError::Precondition(
                "the direction is orthogonal to the mean".into(),
            ));
        }

        let projected: Vec<(f64, f64)> = increments.iter().map(|(z, p)| (dot(&dir, z), *p)).collect();
        let g = |lambda: f64| -> (f64, f64) {
            let mut val = 0.0;
            let mut der = 0.0;
            for (c, p) in &projected {
                let e = p * libm::exp(lambda * c);
                val += e;
                der += c * e;
            }
            (val - 1.0, der)
        };

        // the nonzero root lies on the side where φ initially dips below 1
        let side = -slope.signum();
        let mut hi = side;
        let mut doublings = 0;
        while g(hi).0 <= 0.0 {
            hi *= 2.0;
            doublings += 1;
            if doublings > 60 {
                return Err(ChainError::Numeric(
                    "φ(λ·dir) never exceeds 1; no nonzero root along this direction".into(),
                ));
            }
        }
        // Newton from the far side of a convex function converges
        // monotonically; polish to round-off, then apply the tolerance
        let mut lambda = hi;
        for _ in 0..ROOT_ITERS {
            let (val, der) = g(lambda);
            if val == 0.0 || !(der != 0.0) {
                break;
            }
            let step = val / der;
            lambda -= step;
            if step.abs() <= 4.0 * f64::EPSILON * lambda.abs() {
                break;
            }
        }
        if !(g(lambda).0.abs() <= ROOT_TOL) || lambda * side <= 0.0 {
            return Err(ChainError::Numeric(alloc::format!(
                "root solve did not converge in {ROOT_ITERS} iterations"
            )));
        }

        let u: Vec<f64> = dir.iter().map(|a| a * lambda).collect();
        let increments = Arc::new(increments);
        let hat_increments = Arc::new(
            increments
                .iter()
                .map(|(z, p)| (z.clone(), p * libm::exp(dot(&u, z))))
                .collect::<Vec<_>>(),
        );
        let walk = Self {
            kernel: LatticeKernel { increments },
            hat: LatticeKernel { increments: hat_increments },
            harmonic: LatticeHarmonic { u },
            mean,
        };
        let um = dot_f(walk.u(), &walk.mean);
        let umu = dot_f(walk.u(), &walk.tilted_mean());
        if !(um < 0.0 && umu > 0.0) {
            return Err(ChainError::Numeric(alloc::format!(
                "sign check failed: ⟨u,μ⟩ = {um}, ⟨u,μ_u⟩ = {umu}"
            )));
        }
        Ok(walk)
    }

    pub fn dim(&self) -> usize {
        self.harmonic.u.len()
    }

    pub fn u(&self) -> &[f64] {
        &self.harmonic.u
    }

    pub fn u_norm(&self) -> f64 {
        libm::sqrt(self.harmonic.u.iter().map(|a| a * a).sum())
    }

    /// `φ(v) = E e^{⟨v, ξ⟩}`.
    pub fn phi(&self, v: &[f64]) -> f64 {
        self.kernel.increments.iter().map(|(z, p)| p * libm::exp(dot(v, z))).sum()
    }

    /// `μ`.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// `μ_u`, the mean increment under `P^{h_u}`.
    pub fn tilted_mean(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim()];
        for (z, p) in self.hat.increments.iter() {
            for (m, &zi) in out.iter_mut().zip(z) {
                *m += p * zi as f64;
            }
        }
        out
    }

    /// `M = ‖u‖⁻¹ log Y`.
    pub fn m_from_level(&self, y: f64) -> f64 {
        libm::log(y) / self.u_norm()
    }

    /// `x ∈ H_u(M) ⟺ ⟨u, x⟩/‖u‖ > M`.
    pub fn in_halfspace(&self, x: &LatticePoint, m: f64) -> bool {
        dot(&self.harmonic.u, &x.0) / self.u_norm() > m
    }

    /// Draw `M` (exponential with mean `‖u‖⁻¹`) through `Y = 1/U` from the origin.
    pub fn sample_m(&self, stream: &mut SeededStream) -> f64 {
        self.m_from_level(sample_level_y(1.0, stream))
    }
}

fn dot_f(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Model for LatticeWalk {
    type State = LatticePoint;
    type Kernel = LatticeKernel;
    type HatKernel = LatticeKernel;
    type Harmonic = LatticeHarmonic;

    fn name(&self) -> &str {
        "lattice-walk"
    }

    fn origin(&self) -> LatticePoint {
        LatticePoint::zero(self.dim())
    }

    fn kernel(&self) -> &LatticeKernel {
        &self.kernel
    }

    fn hat_kernel(&self) -> &LatticeKernel {
        &self.hat
    }

    fn harmonic(&self) -> &LatticeHarmonic {
        &self.harmonic
    }

    fn detectability(&self) -> Classification {
        Classification {
            class: DetectabilityClass::CrossingDetectable,
            justification: "⟨u, X̂_n⟩ drifts to +∞ under P^{h_u}, so T < τ_c < ∞ a.s.",
        }
    }

    fn dual_detectability(&self) -> Classification {
        Classification {
            class: DetectabilityClass::CrossingDetectable,
            justification: "⟨u, X_n⟩ drifts to −∞ under P, so inf_n h_u(X_n) = 0",
        }
    }

    fn is_minimal(&self) -> bool {
        true
    }

    fn test_states(&self) -> Vec<LatticePoint> {
        let d = self.dim();
        let radius: i64 = if d <= 2 { 3 } else { 1 };
        let mut out = alloc::vec![LatticePoint(Vec::new())];
        for _ in 0..d {
            let mut next = Vec::new();
            for p in &out {
                for a in -radius..=radius {
                    let mut l = p.0.clone();
                    l.push(a);
                    next.push(LatticePoint(l));
                }
            }
            out = next;
        }
        out
    }
}
