//! Pluggable execution of independent work items.
//!
//! Estimators split their paths into fixed-size blocks whose boundaries do
//! not depend on the worker count, reduce each block sequentially, and merge
//! the block results in index order. Together with per-path random streams
//! this makes every estimate bit-identical for any executor.

use alloc::vec::Vec;
use core::ops::Range;

/// Paths per work block.
pub const BLOCK_SIZE: usize = 256;

pub trait Executor: Sync {
    /// Evaluates `f(0..n)` and returns the results in index order.
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs everything on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..n).map(f).collect()
    }
}

/// Splits `0..n` into blocks of `block` items and maps each block range.
pub fn map_blocks<E, T, F>(exec: &E, n: usize, block: usize, f: F) -> Vec<T>
where
    E: Executor + ?Sized,
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let block = block.max(1);
    let n_blocks = n.div_ceil(block);
    exec.map(n_blocks, |b| {
        let lo = b * block;
        f(lo..(lo + block).min(n))
    })
}
