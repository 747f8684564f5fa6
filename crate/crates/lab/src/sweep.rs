//! Bounded worker pool with results returned in job order.

use rayon::prelude::*;
use serde_json::Value;

use crate::error::LabError;

/// Evaluates `job(k)` for `k = 0..count` on `workers` threads. The output is
/// ordered by `k`, and on failure the error of the lowest failing index is
/// returned, so neither depends on scheduling.
pub fn run_jobs<T, F>(count: usize, workers: usize, describe: impl Fn(usize) -> Value, job: F) -> Result<Vec<T>, LabError>
where
    T: Send,
    F: Fn(usize) -> Result<T, LabError> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::Config(format!("cannot start {workers} workers: {e}")))?;
    let results: Vec<Result<T, LabError>> = pool.install(|| (0..count).into_par_iter().map(&job).collect());
    let mut out = Vec::with_capacity(count);
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push(v),
            Err(e) => return Err(LabError::Job { index, params: describe(index), source: Box::new(e) }),
        }
    }
    Ok(out)
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
