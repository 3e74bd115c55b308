//! Execution strategy for per-point batch work.
//!
//! Batch operations hand every work item to an [`Executor`]; results always
//! come back in item order, so the choice of executor never changes output.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluates `f(0), …, f(len - 1)` and returns the results in index order.
    fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every item on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(f).collect()
    }
}
