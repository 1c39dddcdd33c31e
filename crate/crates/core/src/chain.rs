//! States, transition kernels, harmonic functions and the h-transform.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::error::{ChainError, Result};
use crate::stream::SeededStream;

/// Default cap on the number of paths an enumeration may visit.
pub const DEFAULT_PATH_CAP: usize = 1 << 20;

/// Tolerance used when declaring a closed-form function harmonic.
pub const HARMONIC_TOL: f64 = 1e-10;

/// A state of a discrete model with a canonical text encoding.
///
/// `decode(encode(x)) == x` must hold for every reachable state.
pub trait State: Clone + Ord + Debug + Send + Sync + 'static {
    fn encode(&self) -> String;
    fn decode(text: &str) -> Result<Self>;
}

impl State for i64 {
    fn encode(&self) -> String {
        alloc::format!("{self}")
    }

    fn decode(text: &str) -> Result<Self> {
        text.trim().parse().map_err(|_| ChainError::Codec {
            input: text.into(),
            reason: "expected an integer".into(),
        })
    }
}

/// Whether a kernel's probabilities are exact or rest on Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    Approximate,
}

impl Exactness {
    pub fn and(self, other: Exactness) -> Exactness {
        if self == Exactness::Exact && other == Exactness::Exact {
            Exactness::Exact
        } else {
            Exactness::Approximate
        }
    }
}

/// A Markov transition law `P(x, ·)` with finite support.
pub trait Kernel {
    type State: State;

    /// The one-step law from `x` as `(target, probability)` pairs.
    fn step_law(&self, x: &Self::State) -> Result<Vec<(Self::State, f64)>>;

    /// Draw one step. Consumes exactly one uniform variate unless overridden.
    fn sample(&self, x: &Self::State, stream: &mut SeededStream) -> Result<Self::State> {
        let law = self.step_law(x)?;
        sample_from_law(law, stream.uniform())
    }

    fn exactness(&self) -> Exactness {
        Exactness::Exact
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    type State = K::State;

    fn step_law(&self, x: &Self::State) -> Result<Vec<(Self::State, f64)>> {
        (**self).step_law(x)
    }

    fn sample(&self, x: &Self::State, stream: &mut SeededStream) -> Result<Self::State> {
        (**self).sample(x, stream)
    }

    fn exactness(&self) -> Exactness {
        (**self).exactness()
    }
}

/// Inverse-CDF selection from a finite law. The total mass is used as the
/// scale, so rows that sum to `1 ± ε` are handled without bias toward the
/// last entry.
pub fn sample_from_law<S: Clone>(law: Vec<(S, f64)>, u: f64) -> Result<S> {
    let total: f64 = law.iter().map(|(_, p)| *p).sum();
    if !(total > 0.0) {
        return Err(ChainError::Numeric("empty transition row".into()));
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last = None;
    for (y, p) in law {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        if target < acc {
            return Ok(y);
        }
        last = Some(y);
    }
    last.ok_or_else(|| ChainError::Numeric("empty transition row".into()))
}

/// A nonnegative harmonic function with its declared supremum.
pub trait Harmonic {
    type State: State;

    fn eval(&self, x: &Self::State) -> f64;

    /// `sup h`, possibly `f64::INFINITY`.
    fn sup_value(&self) -> f64;

    /// `inf h`; zero for every model that vanishes somewhere or decays.
    fn inf_value(&self) -> f64 {
        0.0
    }

    fn name(&self) -> &str;
}

impl<H: Harmonic + ?Sized> Harmonic for &H {
    type State = H::State;

    fn eval(&self, x: &Self::State) -> f64 {
        (**self).eval(x)
    }

    fn sup_value(&self) -> f64 {
        (**self).sup_value()
    }

    fn inf_value(&self) -> f64 {
        (**self).inf_value()
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

/// `h + ε`, harmonic whenever `h` is.
#[derive(Debug, Clone)]
pub struct Shifted<H> {
    pub inner: H,
    pub epsilon: f64,
}

impl<H: Harmonic> Harmonic for Shifted<H> {
    type State = H::State;

    fn eval(&self, x: &Self::State) -> f64 {
        self.inner.eval(x) + self.epsilon
    }

    fn sup_value(&self) -> f64 {
        self.inner.sup_value() + self.epsilon
    }

    fn inf_value(&self) -> f64 {
        self.inner.inf_value() + self.epsilon
    }

    fn name(&self) -> &str {
        "shifted"
    }
}

/// `1/h`, harmonic for `P^h` on `S^h`.
#[derive(Debug, Clone)]
pub struct Reciprocal<H>(pub H);

impl<H: Harmonic> Harmonic for Reciprocal<H> {
    type State = H::State;

    fn eval(&self, x: &Self::State) -> f64 {
        1.0 / self.0.eval(x)
    }

    fn sup_value(&self) -> f64 {
        1.0 / self.0.inf_value()
    }

    fn inf_value(&self) -> f64 {
        1.0 / self.0.sup_value()
    }

    fn name(&self) -> &str {
        "reciprocal"
    }
}

/// The constant function 1 on any state type.
#[derive(Debug, Clone, Copy)]
pub struct Unit<S>(core::marker::PhantomData<fn() -> S>);

impl<S> Unit<S> {
    pub fn new() -> Self {
        Unit(core::marker::PhantomData)
    }
}

impl<S> Default for Unit<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: State> Harmonic for Unit<S> {
    type State = S;

    fn eval(&self, _x: &S) -> f64 {
        1.0
    }

    fn sup_value(&self) -> f64 {
        1.0
    }

    fn inf_value(&self) -> f64 {
        1.0
    }

    fn name(&self) -> &str {
        "constant"
    }
}

/// The Doob transform `P^h(x, dy) = P(x, dy) h(y) / h(x)` on `S^h`.
#[derive(Debug, Clone)]
pub struct HTransform<K, H> {
    pub kernel: K,
    pub harmonic: H,
}

/// Build `P^h`. Rows are evaluated lazily; states with `h(x) = 0` are
/// rejected when stepped from.
pub fn h_transform<K, H>(kernel: K, harmonic: H) -> HTransform<K, H>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    HTransform { kernel, harmonic }
}

impl<K, H> Kernel for HTransform<K, H>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    type State = K::State;

    fn step_law(&self, x: &Self::State) -> Result<Vec<(Self::State, f64)>> {
        let hx = self.harmonic.eval(x);
        if !(hx > 0.0) {
            return Err(ChainError::Domain { state: x.encode() });
        }
        let row = self.kernel.step_law(x)?;
        Ok(row
            .into_iter()
            .filter_map(|(y, p)| {
                let w = p * self.harmonic.eval(&y) / hx;
                (w > 0.0).then_some((y, w))
            })
            .collect())
    }

    fn exactness(&self) -> Exactness {
        self.kernel.exactness()
    }
}

/// Per-state residuals `|Σ_y P(x,y) h(y) − h(x)|`.
#[derive(Debug, Clone)]
pub struct HarmonicReport<S> {
    pub residuals: Vec<(S, f64)>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn check_harmonic<K, H>(
    kernel: &K,
    harmonic: &H,
    states: &[K::State],
    tol: f64,
) -> Result<HarmonicReport<K::State>>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    let mut residuals = Vec::with_capacity(states.len());
    let mut max_residual: f64 = 0.0;
    for x in states {
        let row = kernel.step_law(x)?;
        let mean: f64 = row.iter().map(|(y, p)| p * harmonic.eval(y)).sum();
        let r = libm::fabs(mean - harmonic.eval(x));
        max_residual = max_residual.max(r);
        residuals.push((x.clone(), r));
    }
    Ok(HarmonicReport {
        residuals,
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

/// A simulated trajectory together with the stream that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample<S> {
    pub origin: S,
    /// `X_1, …, X_n`.
    pub states: Vec<S>,
    pub seed: u64,
    pub stream: u64,
}

impl<S: State> PathSample<S> {
    /// `X_0, …, X_n`.
    pub fn full(&self) -> Vec<S> {
        let mut v = Vec::with_capacity(self.states.len() + 1);
        v.push(self.origin.clone());
        v.extend(self.states.iter().cloned());
        v
    }
}

pub fn simulate_path<K: Kernel>(
    kernel: &K,
    start: &K::State,
    n: usize,
    stream: &mut SeededStream,
) -> Result<PathSample<K::State>> {
    let seed = stream.seed();
    let counter = stream.counter();
    let mut states = Vec::with_capacity(n);
    let mut x = start.clone();
    for _ in 0..n {
        x = kernel.sample(&x, stream)?;
        states.push(x.clone());
    }
    Ok(PathSample {
        origin: start.clone(),
        states,
        seed,
        stream: counter,
    })
}

/// Map from a path `(x_1, …, x_n)` to its probability.
pub type PathLaw<S> = BTreeMap<Vec<S>, f64>;

/// Every length-`n` path from `o` with positive probability under `kernel`,
/// with its probability. Duplicate targets within a row are merged.
pub fn enumerate_paths<K: Kernel>(
    kernel: &K,
    o: &K::State,
    n: usize,
    cap: usize,
) -> Result<Vec<(Vec<K::State>, f64)>> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<K::State>, f64)> = alloc::vec![(Vec::new(), 1.0)];
    let mut visited = 0usize;
    while let Some((path, prob)) = stack.pop() {
        visited += 1;
        if visited > cap {
            return Err(ChainError::Resource { cap });
        }
        if path.len() == n {
            out.push((path, prob));
            continue;
        }
        let current = path.last().unwrap_or(o);
        let mut row: BTreeMap<K::State, f64> = BTreeMap::new();
        for (y, p) in kernel.step_law(current)? {
            if p > 0.0 {
                *row.entry(y).or_insert(0.0) += p;
            }
        }
        for (y, p) in row.into_iter().rev() {
            let mut next = path.clone();
            next.push(y);
            stack.push((next, prob * p));
        }
    }
    Ok(out)
}

/// The path law of `kernel` over `n` steps from `o`.
pub fn path_law<K: Kernel>(kernel: &K, o: &K::State, n: usize) -> Result<PathLaw<K::State>> {
    Ok(enumerate_paths(kernel, o, n, DEFAULT_PATH_CAP)?
        .into_iter()
        .collect())
}

/// The finite-dimensional law of the h-process: each `P`-path weighted by
/// `h(x_n)/h(o)`. Paths of weight zero are omitted.
pub fn transformed_prefix_law<K, H>(
    kernel: &K,
    harmonic: &H,
    o: &K::State,
    n: usize,
) -> Result<PathLaw<K::State>>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    transformed_prefix_law_capped(kernel, harmonic, o, n, DEFAULT_PATH_CAP)
}

pub fn transformed_prefix_law_capped<K, H>(
    kernel: &K,
    harmonic: &H,
    o: &K::State,
    n: usize,
    cap: usize,
) -> Result<PathLaw<K::State>>
where
    K: Kernel,
    H: Harmonic<State = K::State>,
{
    let ho = harmonic.eval(o);
    if !(ho > 0.0) {
        return Err(ChainError::Domain { state: o.encode() });
    }
    let mut law = PathLaw::new();
    for (path, prob) in enumerate_paths(kernel, o, n, cap)? {
        let end = path.last().unwrap_or(o);
        let w = prob * harmonic.eval(end) / ho;
        if w > 0.0 {
            law.insert(path, w);
        }
    }
    Ok(law)
}

/// Largest entrywise difference between two path laws (missing = 0).
pub fn law_distance<S: Ord>(a: &PathLaw<S>, b: &PathLaw<S>) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, v) in a {
        worst = worst.max(libm::fabs(v - b.get(k).copied().unwrap_or(0.0)));
    }
    for (k, v) in b {
        if !a.contains_key(k) {
            worst = worst.max(libm::fabs(*v));
        }
    }
    worst
}
