//! Monte Carlo orchestration: rate studies, limit comparisons, edge-cell
//! traces, reproducible streams and report emission.
//!
//! Replications run on a rayon pool of the configured size. Each replication
//! draws from its own derived stream and results are gathered in index order
//! and reduced by pairwise summation, so reports do not depend on the number
//! of threads.

pub mod config;
pub mod convergence;
pub mod report;
pub mod rng;

use rayon::prelude::*;

use crate::error::{LabError, Result};

pub use config::{Format, StudyConfig};
pub use convergence::{
    distance_replications, edge_cell_integrals, limit_draws, run_condition1_check, run_convergence_study,
};
pub use report::{emit_report, parse_report, to_json, write_report, StudyReport};
pub use rng::{derive_stream, Stream};

/// `f(0), …, f(count − 1)` computed on `threads` workers (0 = all cores),
/// returned in index order.
pub fn parallel_map<T, F>(threads: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::domain(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(f).collect()))
}
