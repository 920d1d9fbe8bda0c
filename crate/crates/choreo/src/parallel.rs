//! A rayon-backed frontier map.

use choreo_core::global::{FrontierMap, Successors};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError};

/// Expands BFS levels on a fixed-size pool. Results come back in index
/// order, so explorations are identical for every pool size.
pub struct Pool {
    pool: ThreadPool,
}

impl Pool {
    pub fn new(jobs: usize) -> Result<Self, ThreadPoolBuildError> {
        Ok(Pool { pool: rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()? })
    }

    pub fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> R {
        self.pool.install(op)
    }

    pub fn jobs(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl FrontierMap for Pool {
    fn map_frontier(&self, len: usize, f: &(dyn Fn(usize) -> Successors + Sync)) -> Vec<Successors> {
        if len < 2 || self.jobs() == 1 {
            return (0..len).map(f).collect();
        }
        self.pool.install(|| (0..len).into_par_iter().map(f).collect())
    }
}
