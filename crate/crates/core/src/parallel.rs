//! Worker pool sizing. `SWARMSEL_THREADS` caps parallelism (unset or 0 means
//! one worker per core). Results never depend on the worker count.

use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "SWARMSEL_THREADS";

pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))),
        _ => Ok(0),
    }
}

pub fn build_pool(threads: usize) -> Result<ThreadPool> {
    ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

/// Runs `f` inside a pool sized by `SWARMSEL_THREADS`.
pub fn with_env_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = build_pool(threads_from_env()?)?;
    Ok(pool.install(f))
}
