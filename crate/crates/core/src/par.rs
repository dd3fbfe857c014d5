//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the loops below run on the rayon pool; without
//! it they run in order on the calling thread. Reductions always use a fixed
//! chunk partition and sum the partials left to right, so results are
//! bitwise identical whatever the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for deterministic reductions.
pub const REDUCE_CHUNK: usize = 1024;

pub fn current_num_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Applies `f` to every element in place.
pub fn for_each_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_iter_mut().enumerate().for_each(|(i, v)| f(i, v));
    #[cfg(not(feature = "parallel"))]
    data.iter_mut().enumerate().for_each(|(i, v)| f(i, v));
}

/// Applies `f(row_index, row)` to consecutive rows of length `row_len`.
pub fn for_each_row_mut<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len).enumerate().for_each(|(i, r)| f(i, r));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(row_len).enumerate().for_each(|(i, r)| f(i, r));
}

/// Deterministic sum of `f(i, x)` over the slice.
pub fn sum_by<T, F>(data: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(usize, &T) -> f64 + Sync + Send,
{
    let partial = |(c, chunk): (usize, &[T])| -> f64 {
        let base = c * REDUCE_CHUNK;
        chunk.iter().enumerate().map(|(i, v)| f(base + i, v)).sum()
    };
    #[cfg(feature = "parallel")]
    let partials: Vec<f64> = data.par_chunks(REDUCE_CHUNK).enumerate().map(partial).collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<f64> = data.chunks(REDUCE_CHUNK).enumerate().map(partial).collect();
    partials.into_iter().sum()
}

/// Maps independent jobs, preserving input order in the output.
pub fn map_collect<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
