//! Sequential and data-parallel execution of independent batch work.
//!
//! Every batch path in the crate goes through [`Execution`], so results are
//! identical whichever strategy runs them: items are mapped independently and
//! collected in input order. Without the `parallel` feature,
//! `Execution::Parallel` falls back to the sequential path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Like [`map`](Self::map) but with at most `limit` items in flight.
    /// Used for provider calls, where the bound protects the remote endpoint.
    pub fn map_bounded<T, R, F>(self, limit: usize, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel && limit > 1 && items.len() > 1 {
            match rayon::ThreadPoolBuilder::new().num_threads(limit).build() {
                Ok(pool) => return pool.install(|| items.par_iter().map(f).collect()),
                Err(e) => log::warn!("falling back to sequential execution: {e}"),
            }
        }
        let _ = limit;
        items.iter().map(f).collect()
    }
}
