//! Replicate-parallel execution with order-preserving collection.
//!
//! Work item `i` is computed by `f(i)` on whichever thread picks it up, but
//! results come back indexed by `i`, and every reduction in the crate runs
//! sequentially over that vector. Output is therefore identical for any
//! worker count.

use rayon::prelude::*;

use crate::error::Result;

/// Thread count to use: `0` means all available cores.
pub fn resolve_workers(workers: usize) -> usize {
    if workers == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        workers
    }
}

/// `(0..count).map(f)` evaluated on `workers` threads, in index order.
pub fn par_map<T, F>(workers: usize, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let workers = resolve_workers(workers);
    if workers == 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        Err(_) => (0..count).map(f).collect(),
    }
}

/// Fallible [`par_map`]; the reported error is the one with the lowest index.
pub fn try_par_map<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    par_map(workers, count, f).into_iter().collect()
}
