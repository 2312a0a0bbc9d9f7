//! Rayon-backed [`Executor`].

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use stochar_core::Executor;

/// Runs work items on a private thread pool of a fixed size.
pub struct RayonExecutor {
    pool: ThreadPool,
}

impl RayonExecutor {
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        // indexed collect keeps index order
        let f = &f;
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stochar_core::exec::map_blocks;

    #[test]
    fn preserves_order() {
        let e = RayonExecutor::new(4).unwrap();
        assert_eq!(e.map(1000, |i| i * 2), (0..1000).map(|i| i * 2).collect::<Vec<_>>());
        let blocks = map_blocks(&e, 10, 3, |r| r.len());
        assert_eq!(blocks, [3, 3, 3, 1]);
    }
}
