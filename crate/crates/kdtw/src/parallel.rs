//! Data-parallel helpers backed by rayon, with a sequential fallback when the
//! `parallel` feature is disabled.
//!
//! Results are always collected in index order, so enabling or disabling
//! parallelism (or changing the thread count) never changes any output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_indexed<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n` sequentially.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<R>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    (0..n).map(f).collect()
}

/// Sequential twin of [`map_indexed`], available unconditionally so that
/// benchmarks can compare both code paths in one build.
pub fn map_indexed_seq<R>(n: usize, f: impl Fn(usize) -> R) -> Vec<R> {
    (0..n).map(f).collect()
}
