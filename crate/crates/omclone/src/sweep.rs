//! Data-parallel helpers for parameter sweeps.
//!
//! With the default `parallel` feature the cell map fans out over rayon;
//! without it the same call degrades to a sequential loop. Results come back
//! in input order either way, so sweep output is byte-identical regardless of
//! thread count.

/// Map a function over sweep cells, in parallel when the `parallel` feature
/// is enabled.
#[cfg(feature = "parallel")]
pub fn map_cells<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Map a function over sweep cells, in parallel when the `parallel` feature
/// is enabled.
#[cfg(not(feature = "parallel"))]
pub fn map_cells<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_cells_seq(items, f)
}

/// Sequential reference implementation of the cell map.
pub fn map_cells_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Run `job` inside a rayon pool with the requested thread count (`None`
/// leaves the default). Without the `parallel` feature the job just runs.
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("rayon pool")
            .install(job),
        None => job(),
    }
}

/// Run `job` inside a rayon pool with the requested thread count (`None`
/// leaves the default). Without the `parallel` feature the job just runs.
#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    job()
}
