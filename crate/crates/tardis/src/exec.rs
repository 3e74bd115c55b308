use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use tardis_core::exec::Executor;

/// Environment variable that overrides the configured worker count.
pub const THREADS_ENV: &str = "TARDIS_THREADS";

/// Work pool backed by a dedicated rayon thread pool.
pub struct ThreadPoolExecutor {
    pool: rayon::ThreadPool,
}

impl ThreadPoolExecutor {
    /// `threads == 0` uses the machine's available parallelism.
    pub fn new(threads: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .thread_name(|i| format!("tardis-worker-{i}"))
            .build()
            .expect("thread pool");
        Self { pool }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for ThreadPoolExecutor {
    fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..len).into_par_iter().with_max_len(1).map(f).collect())
    }
}

/// Reports completed items on standard error while delegating to `inner`.
pub struct Progress<'a, E> {
    pub inner: &'a E,
    pub label: &'a str,
    pub enabled: bool,
}

impl<E: Executor> Executor for Progress<'_, E> {
    fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if !self.enabled {
            return self.inner.map_indexed(len, f);
        }
        let done = AtomicUsize::new(0);
        let every = (len / 20).max(1);
        let out = self.inner.map_indexed(len, |i| {
            let value = f(i);
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            if n % every == 0 || n == len {
                eprintln!("{}: {n}/{len} points", self.label);
            }
            value
        });
        out
    }
}

/// Worker count from the environment override, if set and valid.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok()
}
