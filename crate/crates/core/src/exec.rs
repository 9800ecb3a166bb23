//! Execution helpers: data-parallel inner loops with a sequential fallback.
//!
//! Every helper produces results that are bit-identical whether it runs on
//! the rayon pool, on one thread, or in the sequential build. Per-index work
//! is independent and written to its own slot; reductions use elementwise
//! `min` over f64, which is exact and order-independent (inputs are finite).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many states the rayon dispatch overhead outweighs the work.
#[cfg(feature = "parallel")]
const PAR_MIN_STATES: usize = 128;

#[cfg(feature = "parallel")]
const PAR_MIN_ITEMS: u64 = 256;

/// Map `f` over `0..n`, collecting results in index order.
pub(crate) fn map_states<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_MIN_STATES {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Elementwise minimum of the length-`width` vectors `f(0), ..., f(count-1)`.
pub(crate) fn min_fold_vectors<F>(count: u64, width: usize, f: F) -> Vec<f64>
where
    F: Fn(u64) -> Vec<f64> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if count >= PAR_MIN_ITEMS {
            return (0..count)
                .into_par_iter()
                .fold(|| vec![f64::INFINITY; width], |acc, i| fold_min(acc, f(i)))
                .reduce(|| vec![f64::INFINITY; width], fold_min);
        }
    }
    (0..count).fold(vec![f64::INFINITY; width], |acc, i| fold_min(acc, f(i)))
}

fn fold_min(mut acc: Vec<f64>, v: Vec<f64>) -> Vec<f64> {
    debug_assert_eq!(acc.len(), v.len());
    for (a, x) in acc.iter_mut().zip(v) {
        if x < *a {
            *a = x;
        }
    }
    acc
}
