//! Worker-thread configuration.
//!
//! All parallel regions in this crate produce results that are invariant
//! to the worker count, so the thread limit is purely a resource knob.
//! `LVIM_THREADS=1` forces the sequential reference path used by the
//! determinism tests.

use crate::error::{Error, Result};

/// Environment variable naming the worker-thread limit.
pub const THREADS_ENV: &str = "LVIM_THREADS";

/// Parse a thread-limit string: `None` means use the default pool.
pub fn parse_thread_count(raw: Option<&str>) -> Result<Option<usize>> {
    match raw {
        None => Ok(None),
        Some(text) => {
            let count: usize = text.trim().parse().map_err(|_| {
                Error::Argument(format!(
                    "{THREADS_ENV} must be a positive integer, got {text:?}"
                ))
            })?;
            if count == 0 {
                return Err(Error::Argument(format!(
                    "{THREADS_ENV} must be at least 1"
                )));
            }
            Ok(Some(count))
        }
    }
}

/// Read the thread limit from the environment.
pub fn thread_count_from_env() -> Result<Option<usize>> {
    parse_thread_count(std::env::var(THREADS_ENV).ok().as_deref())
}

/// Run `f` under an explicit rayon thread limit, or on the default pool
/// when no limit is given.
pub fn with_thread_limit<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        None => f(),
        Some(count) => rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build()
            .expect("thread pool construction")
            .install(f),
    }
}
