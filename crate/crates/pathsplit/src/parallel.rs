//! Seeded fan-out of independent replications.
//!
//! Replication `i` always draws from `SeededStream::new(seed, i)` and results
//! come back in replication order, so output does not depend on the number
//! of workers.

use pathsplit_core::SeededStream;
use rayon::prelude::*;

use crate::error::{RunError, RunResult};

/// Run `f` for replications `0..reps` on `workers` threads (0 = all cores).
pub fn replicate<T, F>(seed: u64, reps: usize, workers: usize, f: F) -> RunResult<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut SeededStream) -> RunResult<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| {
        (0..reps)
            .into_par_iter()
            .map(|i| {
                let mut stream = SeededStream::new(seed, i as u64);
                f(i, &mut stream)
            })
            .collect()
    })
}
