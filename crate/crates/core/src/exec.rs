//! Worker pool abstraction.
//!
//! With the `parallel` feature (default) tasks fan out over a dedicated rayon
//! pool of exactly `threads` workers. Without it, or for
//! [`Executor::sequential`], tasks run inline on the caller's thread.

use std::sync::Arc;

use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Worker count. The default partition count equals the worker count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecutorConfig {
    pub threads: usize,
}

impl ExecutorConfig {
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(Error::ZeroThreads);
        }
        Ok(Self { threads })
    }

    /// One worker per hardware thread.
    pub fn available() -> Self {
        Self {
            threads: num_cpus::get().max(1),
        }
    }

    pub fn default_partitions(&self) -> usize {
        self.threads
    }
}

/// Number of physical cores, falling back to logical cores.
pub fn physical_cores() -> usize {
    num_cpus::get_physical().max(1)
}

pub struct Executor {
    threads: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("threads", &self.threads)
            .field("parallel", &self.is_parallel())
            .finish()
    }
}

impl Executor {
    pub fn new(config: ExecutorConfig) -> Result<Self> {
        if config.threads == 0 {
            return Err(Error::ZeroThreads);
        }
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .thread_name(|i| format!("mdrq-worker-{i}"))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(Self {
                threads: config.threads,
                pool: Some(pool),
            })
        }
        #[cfg(not(feature = "parallel"))]
        {
            Ok(Self {
                threads: config.threads,
            })
        }
    }

    pub fn with_threads(threads: usize) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::new(ExecutorConfig::new(threads)?)?))
    }

    /// Runs every task inline. `threads()` still reports 1.
    pub fn sequential() -> Self {
        Self {
            threads: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    /// Applies `f` to every item, one task per item; output order follows input order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| items.par_iter().with_max_len(1).map(f).collect());
        }
        items.iter().map(f).collect()
    }

    /// Like [`Executor::map`] but consumes the items.
    pub fn map_owned<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| items.into_par_iter().with_max_len(1).map(f).collect());
        }
        items.into_iter().map(f).collect()
    }

    /// `map` over `0..count`.
    pub fn map_range<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| (0..count).into_par_iter().with_max_len(1).map(f).collect());
        }
        (0..count).map(f).collect()
    }

    /// Runs `f` inside the pool so nested rayon calls use its workers.
    pub fn install<R: Send, F: FnOnce() -> R + Send>(&self, f: F) -> R {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(f);
        }
        f()
    }
}

/// Splits `0..len` into `chunks` contiguous ranges of equal size; the last
/// range takes the remainder. Empty ranges are produced when `chunks > len`.
pub fn chunk_ranges(len: usize, chunks: usize) -> Vec<std::ops::Range<usize>> {
    let chunks = chunks.max(1);
    let size = len / chunks;
    (0..chunks)
        .map(|c| {
            let start = c * size;
            let end = if c + 1 == chunks { len } else { start + size };
            start..end
        })
        .collect()
}
