//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) these fan out over the rayon global
//! pool; without it they run sequentially. Call sites never observe the
//! difference except in wall-clock time: every helper returns results in
//! input order.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
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

/// Map `f` over an index range, preserving order.
pub fn map_range<R, F>(range: Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(f).collect()
    }
}

/// Apply `f(chunk_index, chunk)` to consecutive `chunk_len`-sized pieces of `buf`.
pub fn for_each_chunk_mut<T, F>(buf: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if chunk_len == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        buf.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        buf.chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
}

/// Fallible variant of [`for_each_chunk_mut`]; returns the first error by chunk index.
pub fn try_for_each_chunk_mut<T, E, F>(buf: &mut [T], chunk_len: usize, f: F) -> Result<(), E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut [T]) -> Result<(), E> + Sync + Send,
{
    if chunk_len == 0 {
        return Ok(());
    }
    #[cfg(feature = "parallel")]
    {
        let results: Vec<Result<(), E>> = buf
            .par_chunks_mut(chunk_len)
            .enumerate()
            .map(|(i, c)| f(i, c))
            .collect();
        results.into_iter().collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        buf.chunks_mut(chunk_len)
            .enumerate()
            .try_for_each(|(i, c)| f(i, c))
    }
}

/// Minimum of `f` over blocks of `range`; `f` sees one sub-range at a time so
/// it can reuse scratch buffers.
pub fn min_over_blocks<F>(range: Range<u64>, block: u64, f: F) -> Option<usize>
where
    F: Fn(Range<u64>) -> Option<usize> + Sync + Send,
{
    let block = block.max(1);
    let start = range.start;
    let nblocks = range.end.saturating_sub(start).div_ceil(block);
    let sub = |b: u64| {
        let lo = start + b * block;
        let hi = (lo + block).min(range.end);
        f(lo..hi)
    };
    #[cfg(feature = "parallel")]
    {
        (0..nblocks).into_par_iter().filter_map(sub).min()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..nblocks).filter_map(sub).min()
    }
}
