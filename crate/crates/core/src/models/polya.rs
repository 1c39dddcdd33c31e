use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{Harmonic, Kernel, State};
use crate::decomposition::{Classification, DetectabilityClass};
use crate::error::{ChainError, Result};
use crate::model::Model;

/// Urn content: `red` red balls out of `total`, with `0 < red < total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UrnState {
    pub red: u64,
    pub total: u64,
}

impl UrnState {
    pub fn new(red: u64, total: u64) -> Result<Self> {
        if red == 0 || red >= total {
            return Err(ChainError::Precondition(alloc::format!(
                "urn state ({red},{total}) needs 0 < r < t"
            )));
        }
        Ok(Self { red, total })
    }

    fn drawn_red(self) -> Self {
        Self {
            red: self.red + 1,
            total: self.total + 1,
        }
    }

    fn drawn_other(self) -> Self {
        Self {
            red: self.red,
            total: self.total + 1,
        }
    }
}

impl State for UrnState {
    fn encode(&self) -> String {
        alloc::format!("{},{}", self.red, self.total)
    }

    fn decode(text: &str) -> Result<Self> {
        let bad = |reason: &str| ChainError::Codec {
            input: text.into(),
            reason: reason.into(),
        };
        let (r, t) = text.trim().split_once(',').ok_or_else(|| bad("expected `r,t`"))?;
        let red = r.trim().parse().map_err(|_| bad("red count is not an integer"))?;
        let total = t.trim().parse().map_err(|_| bad("total is not an integer"))?;
        UrnState::new(red, total).map_err(|_| bad("needs 0 < r < t"))
    }
}

/// Draw a ball, return it with one more of the same colour.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PolyaKernel;

impl Kernel for PolyaKernel {
    type State = UrnState;

    fn step_law(&self, x: &UrnState) -> Result<Vec<(UrnState, f64)>> {
        let red = x.red as f64 / x.total as f64;
        Ok(vec![(x.drawn_red(), red), (x.drawn_other(), 1.0 - red)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolyaVariant {
    /// `h_p(r,t) = (t−1)·C(t−2, r−1)·p^{r−1}·q^{t−r−1}`.
    Bernoulli { p: f64 },
    /// `h(r,t) = r/t`.
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyaHarmonic {
    pub variant: PolyaVariant,
}

/// `ln C(n, k)`.
fn ln_binomial(n: u64, k: u64) -> f64 {
    let ln_fact = |m: u64| libm::lgamma(m as f64 + 1.0);
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

/// `C(n, k)` by the multiplicative formula; exact enough for moderate `n`.
fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

impl Harmonic for PolyaHarmonic {
    type State = UrnState;

    fn eval(&self, x: &UrnState) -> f64 {
        match self.variant {
            PolyaVariant::Ratio => x.red as f64 / x.total as f64,
            PolyaVariant::Bernoulli { p } => {
                let q = 1.0 - p;
                let (r, t) = (x.red, x.total);
                let (a, b) = (r - 1, t - r - 1);
                if t <= 500 {
                    (t - 1) as f64
                        * binomial(t - 2, a)
                        * libm::pow(p, a as f64)
                        * libm::pow(q, b as f64)
                } else {
                    libm::exp(
                        libm::log((t - 1) as f64)
                            + ln_binomial(t - 2, a)
                            + a as f64 * libm::log(p)
                            + b as f64 * libm::log(q),
                    )
                }
            }
        }
    }

    fn sup_value(&self) -> f64 {
        match self.variant {
            PolyaVariant::Bernoulli { .. } => f64::INFINITY,
            PolyaVariant::Ratio => 1.0,
        }
    }

    fn name(&self) -> &str {
        match self.variant {
            PolyaVariant::Bernoulli { .. } => "h_p",
            PolyaVariant::Ratio => "r/t",
        }
    }
}

/// Closed forms of the transformed urns: a Bernoulli(`p`) walk in the red
/// count for `h_p`, and an urn with one extra red ball for `r/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyaHatKernel {
    pub variant: PolyaVariant,
}

impl Kernel for PolyaHatKernel {
    type State = UrnState;

    fn step_law(&self, x: &UrnState) -> Result<Vec<(UrnState, f64)>> {
        let red = match self.variant {
            PolyaVariant::Bernoulli { p } => p,
            PolyaVariant::Ratio => (x.red + 1) as f64 / (x.total + 1) as f64,
        };
        Ok(vec![(x.drawn_red(), red), (x.drawn_other(), 1.0 - red)])
    }
}

/// Two-colour Pólya urn with either of its two harmonic functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyaUrn {
    kernel: PolyaKernel,
    hat: PolyaHatKernel,
    harmonic: PolyaHarmonic,
}

impl PolyaUrn {
    pub fn new(variant: PolyaVariant) -> Result<Self> {
        if let PolyaVariant::Bernoulli { p } = variant {
            if !(p > 0.0 && p < 1.0) {
                return Err(ChainError::Precondition(alloc::format!(
                    "h_p needs 0 < p < 1, got {p}"
                )));
            }
        }
        Ok(Self {
            kernel: PolyaKernel,
            hat: PolyaHatKernel { variant },
            harmonic: PolyaHarmonic { variant },
        })
    }

    pub fn variant(&self) -> PolyaVariant {
        self.harmonic.variant
    }
}

impl Model for PolyaUrn {
    type State = UrnState;
    type Kernel = PolyaKernel;
    type HatKernel = PolyaHatKernel;
    type Harmonic = PolyaHarmonic;

    fn name(&self) -> &str {
        match self.harmonic.variant {
            PolyaVariant::Bernoulli { .. } => "polya-urn/h_p",
            PolyaVariant::Ratio => "polya-urn/ratio",
        }
    }

    fn origin(&self) -> UrnState {
        UrnState { red: 1, total: 2 }
    }

    fn kernel(&self) -> &PolyaKernel {
        &self.kernel
    }

    fn hat_kernel(&self) -> &PolyaHatKernel {
        &self.hat
    }

    fn harmonic(&self) -> &PolyaHarmonic {
        &self.harmonic
    }

    fn detectability(&self) -> Classification {
        match self.harmonic.variant {
            PolyaVariant::Bernoulli { .. } => Classification {
                class: DetectabilityClass::CrossingDetectable,
                justification: "h_p is minimal with sup h_p = ∞, so h_p(X_n) → ∞ under the transformed chain",
            },
            PolyaVariant::Ratio => Classification {
                class: DetectabilityClass::Undetectable,
                justification: "r/t stays below 1 = sup h, so {τ_c = ∞} has positive probability and no stopping time detects T",
            },
        }
    }

    fn dual_detectability(&self) -> Classification {
        match self.harmonic.variant {
            PolyaVariant::Bernoulli { .. } => Classification {
                class: DetectabilityClass::CrossingDetectable,
                justification: "sup h_p(X_n) = ∞ under the transform is equivalent to inf h_p(X_n) = 0 under P",
            },
            PolyaVariant::Ratio => Classification {
                class: DetectabilityClass::Undetectable,
                justification: "R_n/T_n converges to a limit in (0, 1) under P, so inf h = 0 is not reached",
            },
        }
    }

    fn is_minimal(&self) -> bool {
        matches!(self.harmonic.variant, PolyaVariant::Bernoulli { .. })
    }

    fn test_states(&self) -> Vec<UrnState> {
        let mut v = Vec::new();
        for t in 2..=14 {
            for r in 1..t {
                v.push(UrnState { red: r, total: t });
            }
        }
        v
    }
}
