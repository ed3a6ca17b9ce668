//! Data-parallel maps that fall back to plain iterators when the `parallel`
//! feature is off. Outputs are always collected in index order, so results
//! do not depend on the number of workers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f).collect()`, parallel when enabled.
#[cfg(feature = "parallel")]
pub(crate) fn map_indices<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<R, F>(n: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..n).map(f).collect()
}

/// Counts indices in `0..n` satisfying `pred`.
#[cfg(feature = "parallel")]
pub(crate) fn count_indices<F>(n: usize, pred: F) -> usize
where
    F: Fn(usize) -> bool + Sync + Send,
{
    (0..n).into_par_iter().filter(|&i| pred(i)).count()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn count_indices<F>(n: usize, pred: F) -> usize
where
    F: Fn(usize) -> bool,
{
    (0..n).filter(|&i| pred(i)).count()
}

/// Whether this build runs data-parallel loops on a thread pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
