//! Isotropic nearest-neighbour walk on the homogeneous tree `T_r`.
//!
//! Vertices are reduced words over generators `0..r` (no letter repeated
//! twice in a row), the identity being the empty word. A boundary point
//! `ω` is an infinite reduced word; `h_ω(x) = (r−1)^{d_ω(x)}` with the
//! horocycle index `d_ω(x) = 2|c(x, ω)| − |x|`, where `|c(x, ω)|` is the
//! length of the longest common prefix.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use super::{ceil_exponent, floor_exponent};
use crate::chain::{Harmonic, Kernel, State};
use crate::conditioning::{Direction, SurvivalWeight};
use crate::decomposition::{Classification, DetectabilityClass};
use crate::error::{ChainError, Result};
use crate::model::Model;
use crate::stream::SeededStream;

/// A reduced word; the identity `e` is the empty word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if letters.windows(2).any(|w| w[0] == w[1]) {
            return Err(ChainError::Codec {
                input: alloc::format!("{letters:?}"),
                reason: "immediate repeat in a reduced word".into(),
            });
        }
        Ok(Word(letters))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiply on the right by generator `a` (an involution).
    pub fn times(&self, a: u8) -> Word {
        let mut letters = self.0.clone();
        if letters.last() == Some(&a) {
            letters.pop();
        } else {
            letters.push(a);
        }
        Word(letters)
    }
}

impl State for Word {
    fn encode(&self) -> String {
        if self.0.is_empty() {
            return "e".into();
        }
        let parts: Vec<String> = self.0.iter().map(|a| alloc::format!("{a}")).collect();
        parts.join(".")
    }

    fn decode(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "e" {
            return Ok(Word::identity());
        }
        let letters = text
            .split('.')
            .map(|p| {
                p.parse::<u8>().map_err(|_| ChainError::Codec {
                    input: text.into(),
                    reason: "letters must be generator indices".into(),
                })
            })
            .collect::<Result<Vec<u8>>>()?;
        Word::new(letters).map_err(|_| ChainError::Codec {
            input: text.into(),
            reason: "immediate repeat in a reduced word".into(),
        })
    }
}

/// An end `ω` of the tree, stored as a finite reduced prefix continued by
/// alternating its last two letters. Lookups are O(1) and the value is
/// immutable, so one boundary can be shared by any number of workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    r: u8,
    prefix: Arc<Vec<u8>>,
}

impl Boundary {
    pub fn from_prefix(r: u8, letters: Vec<u8>) -> Result<Self> {
        if letters.len() < 2 {
            return Err(ChainError::Precondition(
                "a boundary prefix needs at least two letters".into(),
            ));
        }
        if letters.iter().any(|&a| a >= r) {
            return Err(ChainError::Precondition(alloc::format!(
                "boundary letters must be below r = {r}"
            )));
        }
        let word = Word::new(letters)?;
        Ok(Self {
            r,
            prefix: Arc::new(word.0),
        })
    }

    /// A pseudo-random end with a materialized prefix of `len` letters.
    pub fn seeded(r: u8, seed: u64, len: usize) -> Self {
        let mut stream = SeededStream::new(seed, u64::MAX);
        let mut letters = Vec::with_capacity(len.max(2));
        let pick = |stream: &mut SeededStream, n: u8| {
            ((stream.uniform() * n as f64) as u8).min(n - 1)
        };
        letters.push(pick(&mut stream, r));
        while letters.len() < len.max(2) {
            let prev = *letters.last().expect("non-empty");
            let mut a = pick(&mut stream, r - 1);
            if a >= prev {
                a += 1;
            }
            letters.push(a);
        }
        Self {
            r,
            prefix: Arc::new(letters),
        }
    }

    /// The `k`-th letter, 0-based.
    pub fn letter(&self, k: usize) -> u8 {
        let n = self.prefix.len();
        if k < n {
            self.prefix[k]
        } else {
            // alternate the last two letters forever
            self.prefix[n - 2 + (k - n) % 2]
        }
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word((0..len).map(|k| self.letter(k)).collect())
    }

    pub fn branching(&self) -> u8 {
        self.r
    }

    /// `|c(x, ω)|`.
    pub fn common_prefix(&self, x: &Word) -> usize {
        x.0.iter()
            .enumerate()
            .take_while(|(k, &a)| self.letter(*k) == a)
            .count()
    }

    /// `d_ω(x) = 2|c(x, ω)| − |x|`.
    pub fn horocycle(&self, x: &Word) -> i64 {
        2 * self.common_prefix(x) as i64 - x.len() as i64
    }
}

/// `P(x, x a_i) = 1/r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeKernel {
    pub r: u8,
}

impl Kernel for TreeKernel {
    type State = Word;

    fn step_law(&self, x: &Word) -> Result<Vec<(Word, f64)>> {
        let p = 1.0 / self.r as f64;
        Ok((0..self.r).map(|a| (x.times(a), p)).collect())
    }

    fn sample(&self, x: &Word, stream: &mut SeededStream) -> Result<Word> {
        let a = ((stream.uniform() * self.r as f64) as u8).min(self.r - 1);
        Ok(x.times(a))
    }
}

/// `P^{h_ω}`: the neighbour toward `ω` with probability `(r−1)/r`, each of
/// the other `r−1` neighbours with probability `1/(r(r−1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeHatKernel {
    pub boundary: Boundary,
}

impl TreeHatKernel {
    /// The unique neighbour that increases `d_ω`.
    fn toward(&self, x: &Word) -> Word {
        let c = self.boundary.common_prefix(x);
        if c == x.len() {
            let mut letters = x.0.clone();
            letters.push(self.boundary.letter(c));
            Word(letters)
        } else {
            let mut letters = x.0.clone();
            letters.pop();
            Word(letters)
        }
    }
}

impl Kernel for TreeHatKernel {
    type State = Word;

    fn step_law(&self, x: &Word) -> Result<Vec<(Word, f64)>> {
        let r = self.boundary.r;
        let up = self.toward(x);
        let rf = r as f64;
        Ok((0..r)
            .map(|a| {
                let y = x.times(a);
                let p = if y == up { (rf - 1.0) / rf } else { 1.0 / (rf * (rf - 1.0)) };
                (y, p)
            })
            .collect())
    }
}

/// `h_ω(x) = (r−1)^{d_ω(x)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeHarmonic {
    pub boundary: Boundary,
}

impl Harmonic for TreeHarmonic {
    type State = Word;

    fn eval(&self, x: &Word) -> f64 {
        let base = (self.boundary.r - 1) as f64;
        libm::pow(base, self.boundary.horocycle(x) as f64)
    }

    fn sup_value(&self) -> f64 {
        f64::INFINITY
    }

    fn name(&self) -> &str {
        "h_omega"
    }
}

/// `q̃(n)`, the stay-below weight in horocycle-offset coordinates:
/// `((r−1)^n − r + 1)/(2 − r)` for `n ≤ 0`, zero above. `q̃(0) = 1`.
pub fn tree_q_tilde(r: u8, n: i64) -> f64 {
    if n > 0 {
        return 0.0;
    }
    let rf = r as f64;
    (libm::pow(rf - 1.0, n as f64) - rf + 1.0) / (2.0 - rf)
}

/// `q̃*(i) = ((r−1)^i − 1)/(r−1)^{i−1}` for `i ≥ 0`, zero below.
pub fn tree_q_star_tilde(r: u8, i: i64) -> f64 {
    if i < 0 {
        return 0.0;
    }
    let b = (r - 1) as f64;
    (libm::pow(b, i as f64) - 1.0) / libm::pow(b, (i - 1) as f64)
}

fn ratio_pow(base: i128, exp: i64) -> Ratio<i128> {
    let b = Ratio::from_integer(base);
    if exp >= 0 {
        num_traits::pow(b, exp as usize)
    } else {
        num_traits::pow(b.recip(), (-exp) as usize)
    }
}

/// Exact rational `q̃(n)`.
pub fn tree_q_tilde_exact(r: u8, n: i64) -> Ratio<i128> {
    if n > 0 {
        return Ratio::zero();
    }
    let r = r as i128;
    (ratio_pow(r - 1, n) - Ratio::from_integer(r - 1)) / Ratio::from_integer(2 - r)
}

/// Exact rational `q̃*(i)`.
pub fn tree_q_star_tilde_exact(r: u8, i: i64) -> Ratio<i128> {
    if i < 0 {
        return Ratio::zero();
    }
    let b = r as i128 - 1;
    (ratio_pow(b, i) - Ratio::one()) / ratio_pow(b, i - 1)
}

/// Residual of `∫ h_ω(x) μ(dω) = 1`, computed class by class over the
/// length of the common prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureResidual {
    pub exact: Ratio<i128>,
    pub float: f64,
}

/// Sum `h_ω(x)` over the uniform law of `ω`'s first `|x|` letters, grouping
/// boundary words by `k = |c(x, ω)|`: one word with `k = |x|`,
/// `(r−2)(r−1)^{|x|−k−1}` with `1 ≤ k < |x|`, and `(r−1)^{|x|}` with
/// `k = 0`. Returns `|sum − 1|` exactly and in floating point.
pub fn boundary_mixture_check(r: u8, x: &Word) -> Result<MixtureResidual> {
    if r < 3 {
        return Err(ChainError::Precondition("the tree needs r ≥ 3".into()));
    }
    let len = x.len() as i64;
    if len == 0 {
        return Ok(MixtureResidual {
            exact: Ratio::zero(),
            float: 0.0,
        });
    }
    let b = r as i128 - 1;
    // keep (r−1)^{2|x|} and r·(r−1)^{|x|−1} inside i128
    if b.checked_pow(2 * len as u32 + 2).is_none() {
        return Err(ChainError::Resource { cap: x.len() });
    }
    let class_count = |k: i64| -> i128 {
        if k == len {
            1
        } else if k == 0 {
            b.pow(len as u32)
        } else {
            (b - 1) * b.pow((len - k - 1) as u32)
        }
    };
    let mut exact = Ratio::zero();
    let mut float = 0.0;
    let bf = b as f64;
    for k in 0..=len {
        let count = class_count(k);
        exact += Ratio::from_integer(count) * ratio_pow(b, 2 * k - len);
        float += count as f64 * libm::pow(bf, (2 * k - len) as f64);
    }
    let norm = (b + 1) * b.pow((len - 1) as u32);
    exact /= Ratio::from_integer(norm);
    float /= norm as f64;
    Ok(MixtureResidual {
        exact: (exact - Ratio::one()).abs(),
        float: libm::fabs(float - 1.0),
    })
}

/// Isotropic walk on `T_r` with the minimal harmonic function `h_ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeWalk {
    r: u8,
    kernel: TreeKernel,
    hat: TreeHatKernel,
    harmonic: TreeHarmonic,
}

impl TreeWalk {
    pub fn new(boundary: Boundary) -> Result<Self> {
        let r = boundary.r;
        if r < 3 {
            return Err(ChainError::Precondition(alloc::format!(
                "the tree needs r ≥ 3, got {r}"
            )));
        }
        Ok(Self {
            r,
            kernel: TreeKernel { r },
            hat: TreeHatKernel {
                boundary: boundary.clone(),
            },
            harmonic: TreeHarmonic { boundary },
        })
    }

    /// `T_r` with a fixed boundary point `ω = 0 1 0 1 …`.
    pub fn standard(r: u8) -> Result<Self> {
        Self::new(Boundary::from_prefix(r, alloc::vec![0, 1])?)
    }

    pub fn branching(&self) -> u8 {
        self.r
    }

    pub fn boundary(&self) -> &Boundary {
        &self.harmonic.boundary
    }

    pub fn horocycle(&self, x: &Word) -> i64 {
        self.harmonic.boundary.horocycle(x)
    }

    fn base(&self) -> f64 {
        (self.r - 1) as f64
    }

    fn base_pow(&self, k: i64) -> f64 {
        libm::pow(self.base(), k as f64)
    }

    /// Every reduced word of length at most `max_len`.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        let mut out = alloc::vec![Word::identity()];
        let mut frontier = alloc::vec![Word::identity()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for a in 0..self.r {
                    if w.0.last() != Some(&a) {
                        let mut l = w.0.clone();
                        l.push(a);
                        next.push(Word(l));
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

impl Model for TreeWalk {
    type State = Word;
    type Kernel = TreeKernel;
    type HatKernel = TreeHatKernel;
    type Harmonic = TreeHarmonic;

    fn name(&self) -> &str {
        "tree-walk"
    }

    fn origin(&self) -> Word {
        Word::identity()
    }

    fn kernel(&self) -> &TreeKernel {
        &self.kernel
    }

    fn hat_kernel(&self) -> &TreeHatKernel {
        &self.hat
    }

    fn harmonic(&self) -> &TreeHarmonic {
        &self.harmonic
    }

    fn detectability(&self) -> Classification {
        Classification {
            class: DetectabilityClass::CrossingDetectable,
            justification: "d_ω drifts to +∞ under the transform, so sup_n h_ω = ∞ and T < τ_c < ∞ a.s.",
        }
    }

    fn dual_detectability(&self) -> Classification {
        Classification {
            class: DetectabilityClass::CrossingDetectable,
            justification: "d_ω drifts to −∞ under the isotropic walk, so inf_n h_ω = 0",
        }
    }

    fn is_minimal(&self) -> bool {
        true
    }

    fn survival_below(&self, level: f64) -> Option<SurvivalWeight<Word>> {
        let k = floor_exponent(self.base(), level);
        let r = self.r;
        let boundary = self.harmonic.boundary.clone();
        let lambda = (r as f64 - 1.0) / (r as f64 - 2.0);
        Some(SurvivalWeight::closed_form(level, Direction::StayBelow, lambda, move |x: &Word| {
            tree_q_tilde(r, boundary.horocycle(x) - k)
        }))
    }

    fn survival_above(&self, level: f64) -> Option<SurvivalWeight<Word>> {
        let k = ceil_exponent(self.base(), level);
        let r = self.r;
        let boundary = self.harmonic.boundary.clone();
        Some(SurvivalWeight::closed_form(
            level,
            Direction::StayAbove,
            r as f64 - 1.0,
            move |x: &Word| tree_q_star_tilde(r, boundary.horocycle(x) - k + 1),
        ))
    }

    fn crossing_probability(&self, x: &Word, level: f64) -> Option<f64> {
        let k = floor_exponent(self.base(), level);
        let d = self.horocycle(x);
        Some(if d > k { 1.0 } else { self.base_pow(-(k + 1 - d)) })
    }

    fn hat_crossing_moment(&self, x: &Word, level: f64) -> Option<f64> {
        let k = floor_exponent(self.base(), level);
        let d = self.horocycle(x);
        Some(if d > k { self.base_pow(-d) } else { self.base_pow(-(k + 1)) })
    }

    fn hat_undershoot_probability(&self, x: &Word, level: f64) -> Option<f64> {
        let k = ceil_exponent(self.base(), level);
        let d = self.horocycle(x);
        Some(if d < k { 1.0 } else { self.base_pow(-(d - k + 1)) })
    }

    fn undershoot_moment(&self, x: &Word, level: f64) -> Option<f64> {
        let k = ceil_exponent(self.base(), level);
        let d = self.horocycle(x);
        Some(if d < k { self.base_pow(d) } else { self.base_pow(k - 1) })
    }

    fn test_states(&self) -> Vec<Word> {
        self.words_up_to(4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{check_harmonic, h_transform, HARMONIC_TOL};
    use crate::conditioning::{conditioned_kernel, validate_survival};

    #[test]
    fn word_codec() {
        let w = Word::new(alloc::vec![0, 2, 1]).unwrap();
        assert_eq!(w.encode(), "0.2.1");
        assert_eq!(Word::decode("0.2.1").unwrap(), w);
        assert_eq!(Word::decode("e").unwrap(), Word::identity());
        assert!(Word::decode("0.0").is_err());
        assert!(Word::new(alloc::vec![1, 1]).is_err());
    }

    #[test]
    fn identity_and_first_letter() {
        let t = TreeWalk::standard(3).unwrap();
        assert_eq!(t.horocycle(&Word::identity()), 0);
        assert_eq!(t.harmonic().eval(&Word::identity()), 1.0);
        let first = t.boundary().prefix(1);
        assert_eq!(t.horocycle(&first), 1);
        assert_eq!(t.harmonic().eval(&first), 2.0);
    }

    #[test]
    fn exactly_one_neighbour_increases_horocycle() {
        for r in 3..=5u8 {
            let t = TreeWalk::new(Boundary::seeded(r, 11, 8)).unwrap();
            for x in t.words_up_to(4) {
                let d = t.horocycle(&x);
                let ups = (0..r).filter(|&a| t.horocycle(&x.times(a)) == d + 1).count();
                let downs = (0..r).filter(|&a| t.horocycle(&x.times(a)) == d - 1).count();
                assert_eq!((ups, downs), (1, r as usize - 1), "r={r} x={x:?}");
            }
        }
    }

    #[test]
    fn harmonic_and_transform_closed_form() {
        for r in 3..=6u8 {
            let t = TreeWalk::standard(r).unwrap();
            let states = t.test_states();
            let rep = check_harmonic(t.kernel(), t.harmonic(), &states, HARMONIC_TOL).unwrap();
            assert!(rep.pass, "r={r}: {}", rep.max_residual);
            let ph = h_transform(*t.kernel(), t.harmonic().clone());
            for x in &states {
                let a = ph.step_law(x).unwrap();
                let b = t.hat_kernel().step_law(x).unwrap();
                for ((ya, pa), (yb, pb)) in a.iter().zip(b.iter()) {
                    assert_eq!(ya, yb);
                    assert!((pa - pb).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn conditioned_steps_at_offset_zero() {
        let t = TreeWalk::standard(3).unwrap();
        let q = t.survival_below(1.0).unwrap();
        let k = conditioned_kernel(*t.kernel(), t.harmonic().clone(), q);
        let row = k.step_law(&Word::identity()).unwrap();
        let total: f64 = row.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (y, p) in &row {
            assert_eq!(t.horocycle(y), -1);
            assert!((p - 0.5).abs() < 1e-15);
        }
        assert!((tree_q_tilde(3, -1) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn survivals_are_restricted_harmonic() {
        for r in 3..=5u8 {
            let t = TreeWalk::standard(r).unwrap();
            let states = t.words_up_to(5);
            for s in [0.2, 1.0, (r - 1) as f64, 3.7] {
                let q = t.survival_below(s).unwrap();
                let rep = validate_survival(t.kernel(), t.harmonic(), &q, &states).unwrap();
                assert!(rep.max_residual < 1e-12, "below r={r} s={s}: {rep:?}");
                let q = t.survival_above(s).unwrap();
                let rep = validate_survival(t.hat_kernel(), t.harmonic(), &q, &states).unwrap();
                assert!(rep.max_residual < 1e-12, "above r={r} s={s}: {rep:?}");
            }
        }
    }

    #[test]
    fn normalized_survival_matches_ruin_probability() {
        let t = TreeWalk::standard(4).unwrap();
        let q = t.survival_below(1.0).unwrap();
        // from d = 0, P(never reach d = 1) = 1 − 1/(r−1)
        assert!((q.probability(&Word::identity()) - (1.0 - 1.0 / 3.0)).abs() < 1e-15);
        let qs = t.survival_above(1.0).unwrap();
        // from d = 0 under the transform, P(never reach d = −1) = 1 − 1/(r−1)
        assert!((qs.probability(&Word::identity()) - (1.0 - 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn mixture_small_cases() {
        assert_eq!(boundary_mixture_check(3, &Word::identity()).unwrap().exact, Ratio::zero());
        let x = Word::new(alloc::vec![0, 1]).unwrap();
        assert_eq!(boundary_mixture_check(3, &x).unwrap().exact, Ratio::zero());
    }
}
