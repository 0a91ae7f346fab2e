//! Replica-level data parallelism.
//!
//! Replicas never share state: each gets its own `RngStream`, and results come back
//! in replica order, so every downstream reduction sees the same sequence whether
//! the replicas ran on one thread or many.

/// How replicas are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon thread pool when the `parallel` feature is on, otherwise sequential.
    #[default]
    Auto,
    Sequential,
}

/// `[f(0), f(1), ..., f(n-1)]`, evaluated on the rayon pool when available.
pub fn map_replicas<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_replicas_sequential(n, f)
    }
}

/// `[f(0), ..., f(n-1)]` on the calling thread.
pub fn map_replicas_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

pub fn map_with<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Auto => map_replicas(n, f),
        Execution::Sequential => map_replicas_sequential(n, f),
    }
}

/// Whether [`map_replicas`] can use more than one thread.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
