//! Worker pool for independent trials. Results always come back in task
//! order, so reductions over them do not depend on scheduling.

use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "ALLOC_WORKERS";

/// Worker count from `ALLOC_WORKERS`, else the available parallelism.
pub fn configured_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn default_pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        ThreadPoolBuilder::new()
            .num_threads(configured_workers())
            .build()
            .expect("thread pool")
    })
}

/// Runs `f` inside a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

/// `f(0), .., f(n-1)` evaluated in parallel, returned in index order.
pub fn map_ordered<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let run = || (0..n).into_par_iter().map(&f).collect();
    if rayon::current_thread_index().is_some() {
        run()
    } else {
        default_pool().install(run)
    }
}
