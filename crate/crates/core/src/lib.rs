//! Path decompositions of Markov chains at the extrema of a harmonic
//! function.
//!
//! Given a kernel `P` and a nonnegative harmonic `h`, a `P`-chain can be
//! assembled from an `h`-transformed chain run up to a random splitting
//! index and a chain conditioned to stay below the level reached there
//! ([`decomposition::theorem2_sample`]); dually, a `P^h`-chain can be
//! assembled from a `P`-chain and a conditioned `P^h`-chain
//! ([`decomposition::theorem3_sample`]). The crate provides the kernels,
//! transforms, survival weights, samplers and closed-form models needed to
//! run and check both constructions.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod chain;
pub mod conditioning;
pub mod decomposition;
pub mod error;
pub mod model;
pub mod models;
pub mod stream;

pub use chain::{Exactness, Harmonic, Kernel, PathLaw, PathSample, State};
pub use conditioning::{Direction, SurvivalWeight};
pub use decomposition::{
    Classification, DecompositionSample, DetectabilityClass, DualDecompositionSample, Policy,
    SamplerOptions,
};
pub use error::{ChainError, Result};
pub use model::Model;
pub use stream::SeededStream;
