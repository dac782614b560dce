//! Chunked data-parallel map with a fixed chunk layout.
//!
//! Results come back in chunk order and callers reduce them sequentially, so
//! the floating-point result does not depend on the number of worker threads
//! or on whether the `parallel` feature is enabled.

/// How per-point and per-run work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is on, otherwise
    /// identical to `Sequential`.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Collocation points per work item.
pub const CHUNK: usize = 32;

/// Applies `f(start, chunk)` to consecutive `chunk_len`-sized slices of `items`.
pub fn map_chunks<T, R, F>(items: &[T], chunk_len: usize, exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    let chunk_len = chunk_len.max(1);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items
            .par_chunks(chunk_len)
            .enumerate()
            .map(|(k, c)| f(k * chunk_len, c))
            .collect();
    }
    let _ = exec;
    items
        .chunks(chunk_len)
        .enumerate()
        .map(|(k, c)| f(k * chunk_len, c))
        .collect()
}

/// Maps `f` over `items` one element per task, preserving order.
pub fn map_each<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}
