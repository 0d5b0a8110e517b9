//! Execution strategy for embarrassingly parallel grids.
//!
//! Scans (potential grids, fidelity sweeps) evaluate an independent pure
//! function per grid point. With the default `parallel` feature the work is
//! distributed with rayon; without it the same entry points run
//! sequentially. `map_collect_seq` is always available so benchmarks can
//! compare the two paths in one build. Both paths return results in input
//! order, so output artifacts are identical regardless of strategy or
//! thread count.

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items` sequentially (the `parallel` feature is off).
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Sequential fallback, available regardless of features.
pub fn map_collect_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Caps the rayon worker count for subsequent parallel scans. Returns an
/// error string if a global pool was already installed. A no-op without the
/// `parallel` feature.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// No-op stub: everything runs sequentially without the `parallel` feature.
#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) -> Result<(), String> {
    Ok(())
}
