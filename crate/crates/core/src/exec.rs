//! Data-parallel driving loops with a sequential fallback.
//!
//! Monte Carlo batches and per-grid-point quadratures are embarrassingly
//! parallel. With the `parallel` feature (default) they run on rayon; without
//! it the same loops run sequentially. Randomized work is keyed by batch
//! index through [`Stream::child`], so output is identical in both modes and
//! for any thread count.
//!
//! The `_seq`/`_par` variants stay public so benchmarks can compare the two
//! execution paths directly.

use crate::stream::Stream;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Draws per RNG batch. One batch shares a generator; batches get disjoint
/// child streams.
pub const BATCH: usize = 1024;

/// Fills a vector of `n` draws, one call to `f` per index, batched by stream.
pub fn sample_indexed<T, F>(n: usize, stream: Stream, f: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        sample_indexed_par(n, stream, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sample_indexed_seq(n, stream, f)
    }
}

pub fn sample_indexed_seq<T, F>(n: usize, stream: Stream, f: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let mut out = vec![T::default(); n];
    for (b, chunk) in out.chunks_mut(BATCH).enumerate() {
        fill_batch(chunk, b, stream, &f);
    }
    out
}

#[cfg(feature = "parallel")]
pub fn sample_indexed_par<T, F>(n: usize, stream: Stream, f: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let mut out = vec![T::default(); n];
    out.par_chunks_mut(BATCH)
        .enumerate()
        .for_each(|(b, chunk)| fill_batch(chunk, b, stream, &f));
    out
}

fn fill_batch<T, F>(chunk: &mut [T], batch: usize, stream: Stream, f: &F)
where
    F: Fn(&mut ChaCha8Rng, usize) -> T,
{
    let mut rng = stream.child(batch as u64).rng();
    for (j, slot) in chunk.iter_mut().enumerate() {
        *slot = f(&mut rng, batch * BATCH + j);
    }
}

/// Maps `f` over a slice, in parallel when enabled. Used for per-grid-point
/// work such as characteristic-function sums and quadratures.
pub fn map_slice<T, U, F>(xs: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_slice_par(xs, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_slice_seq(xs, f)
    }
}

pub fn map_slice_seq<T, U, F>(xs: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    xs.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_slice_par<T, U, F>(xs: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    xs.par_iter().map(f).collect()
}

/// Fallible variant of [`map_slice`]; returns the first error encountered.
pub fn try_map_slice<T, U, E, F>(xs: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        xs.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        xs.iter().map(f).collect()
    }
}

/// Sorts a sample ascending, in parallel when enabled.
pub fn sort(values: &mut [f64]) {
    #[cfg(feature = "parallel")]
    {
        values.par_sort_unstable_by(f64::total_cmp);
    }
    #[cfg(not(feature = "parallel"))]
    {
        values.sort_unstable_by(f64::total_cmp);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn batching_is_order_stable() {
        let s = Stream::root(5);
        let a = sample_indexed_seq(3000, s, |rng, _| rng.random::<f64>());
        let b = sample_indexed(3000, s, |rng, _| rng.random::<f64>());
        assert_eq!(a, b);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_sequential() {
        let s = Stream::root(11);
        let f = |rng: &mut ChaCha8Rng, i: usize| rng.random::<f64>() + i as f64;
        assert_eq!(
            sample_indexed_seq(10_000, s, f),
            sample_indexed_par(10_000, s, f)
        );
        let xs: Vec<f64> = (0..512).map(|i| i as f64).collect();
        let g = |x: &f64| x * x;
        assert_eq!(map_slice_seq(&xs, g), map_slice_par(&xs, g));
    }
}
