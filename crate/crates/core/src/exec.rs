//! Execution helpers: data-parallel map with a sequential fallback.
//!
//! Everything parallel in this crate funnels through [`map_indexed`]. With
//! the `parallel` feature (default) it fans out over rayon; without it the
//! same call compiles to a plain sequential loop. Results are collected in
//! index order either way, so callers observe identical output — the
//! determinism tests assert bit equality between the two paths.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Sequential reference implementation of [`map_indexed`]. Used by the
/// determinism tests and the benchmark suite as the baseline.
pub fn map_indexed_seq<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Caps the rayon thread pool. Call once, before any parallel work; later
/// calls are ignored (rayon's global pool can only be built once). A no-op
/// in sequential builds or when `n` is zero.
pub fn configure_threads(n: usize) {
    #[cfg(feature = "parallel")]
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}
