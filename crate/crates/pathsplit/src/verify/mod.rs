//! Exact enumeration oracles, identity checks and sampler statistics.

pub mod checks;
pub mod report;
pub mod split;
pub mod stats;

pub use checks::*;
pub use report::{all_pass, TestReport};
pub use split::{
    check_dual_total_law, check_split_identities, check_total_law, constructed_dual_law, constructed_split_law,
    direct_dual_law, direct_split_law, dual_identity_errors, split_identity_errors, IdentityCheck, SplitIndex,
    SplitLawTable, EXACT_TOL,
};
pub use stats::{chi2_against_law, chi2_two_sample, count, two_sample_chi2, Chi2, Counts, Reference};
