//! Index-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) [`map_range`] uses rayon; without it
//! it is a plain loop. Results are always returned in index order, so
//! reductions over them are independent of the thread count.

/// Evaluate `f(i)` for `i in 0..len`, in parallel when available.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_range_sequential(len, f)
    }
}

/// Evaluate `f(i)` for `i in 0..len` on the calling thread.
pub fn map_range_sequential<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Split `0..len` into fixed-size chunks and map each chunk.
///
/// The chunking does not depend on the thread count.
pub fn map_chunks<T, F>(len: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let count = len.div_ceil(chunk);
    map_range(count, |c| {
        let start = c * chunk;
        f(start..(start + chunk).min(len))
    })
}

/// Number of worker threads the parallel path will use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
