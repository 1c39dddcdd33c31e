//! The model families: drifted walks on ℤ and ℤ^d, the absorbed simple
//! walk, Pólya's urn, isotropic walks on homogeneous trees, and a
//! constant-h wrapper for degenerate decompositions.

mod absorbed;
mod constant;
mod drifted;
mod lattice;
mod polya;
mod tree;

pub use absorbed::{AbsorbedHatKernel, AbsorbedKernel, AbsorbedWalk, RenewalHarmonic};
pub use constant::ConstantModel;
pub use drifted::{DriftedWalk, ExpHarmonic, WalkKernel};
pub use lattice::{LatticeHarmonic, LatticeKernel, LatticePoint, LatticeWalk};
pub use polya::{PolyaHarmonic, PolyaHatKernel, PolyaKernel, PolyaUrn, PolyaVariant, UrnState};
pub use tree::{
    boundary_mixture_check, tree_q_star_tilde, tree_q_star_tilde_exact, tree_q_tilde,
    tree_q_tilde_exact, Boundary, MixtureResidual, TreeHarmonic, TreeHatKernel, TreeKernel,
    TreeWalk, Word,
};

use crate::conditioning::{above_level, below_level};

/// Largest integer `k` with `base^k ≤ s` (ties included).
pub(crate) fn floor_exponent(base: f64, s: f64) -> i64 {
    let mut k = libm::floor(libm::log(s) / libm::log(base)) as i64;
    while below_level(libm::pow(base, (k + 1) as f64), s) {
        k += 1;
    }
    while !below_level(libm::pow(base, k as f64), s) {
        k -= 1;
    }
    k
}

/// Smallest integer `k` with `base^k ≥ s` (ties included).
pub(crate) fn ceil_exponent(base: f64, s: f64) -> i64 {
    let mut k = libm::ceil(libm::log(s) / libm::log(base)) as i64;
    while above_level(libm::pow(base, (k - 1) as f64), s) {
        k -= 1;
    }
    while !above_level(libm::pow(base, k as f64), s) {
        k += 1;
    }
    k
}
