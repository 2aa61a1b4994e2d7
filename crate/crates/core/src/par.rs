//! Data-parallel helpers. With the `parallel` feature (default) work is
//! spread over a rayon pool; without it, or with one thread, everything
//! runs on the calling thread in the same order.

use serde::{Deserialize, Serialize};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "SEPEKR_THREADS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parallelism {
    /// `None` uses the global rayon pool; `Some(1)` forces the sequential path.
    pub threads: Option<usize>,
}

impl Parallelism {
    pub const SEQUENTIAL: Parallelism = Parallelism { threads: Some(1) };

    pub fn threads(threads: usize) -> Self {
        Parallelism {
            threads: Some(threads.max(1)),
        }
    }

    /// Reads `SEPEKR_THREADS`; unset or unparsable means "all cores".
    pub fn from_env() -> Self {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&t| t > 0);
        Parallelism { threads }
    }

    pub fn is_sequential(&self) -> bool {
        !cfg!(feature = "parallel") || self.threads == Some(1)
    }

    /// Applies `f` to every item; output order always matches input order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        if self.is_sequential() {
            return items.iter().map(f).collect();
        }
        self.map_parallel(items, f)
    }

    #[cfg(feature = "parallel")]
    fn map_parallel<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        use rayon::prelude::*;
        match self.threads {
            Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                Err(_) => items.iter().map(f).collect(),
            },
            None => items.par_iter().map(f).collect(),
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn map_parallel<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        items.iter().map(f).collect()
    }
}
