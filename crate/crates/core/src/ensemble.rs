//! Batched ensemble execution with a deterministic reduction order.
//!
//! Samples `0..n` are cut into a fixed number of contiguous batches. Batches
//! run in parallel on the ambient rayon pool, but results come back in batch
//! order and callers reduce them sequentially, so outputs are bit-identical
//! for any pool size.

use std::ops::Range;

use rayon::prelude::*;

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 32;

pub fn batch_ranges(n: usize, batches: usize) -> Vec<Range<usize>> {
    let batches = batches.max(1);
    (0..batches)
        .map(|b| (b * n / batches)..((b + 1) * n / batches))
        .collect()
}

/// Runs `work(batch_index, sample_range)` for every batch and returns the
/// results in batch order.
pub fn run_batches<A, E, F>(n: usize, batches: usize, work: F) -> Result<Vec<A>, E>
where
    A: Send,
    E: Send,
    F: Fn(usize, Range<usize>) -> Result<A, E> + Sync,
{
    batch_ranges(n, batches)
        .into_par_iter()
        .enumerate()
        .map(|(b, range)| work(b, range))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover_everything_once() {
        for n in [0usize, 1, 31, 32, 33, 1000, 12345] {
            let ranges = batch_ranges(n, BATCHES);
            assert_eq!(ranges.len(), BATCHES);
            assert_eq!(ranges[0].start, 0);
            assert_eq!(ranges.last().unwrap().end, n);
            for w in ranges.windows(2) {
                assert_eq!(w[0].end, w[1].start);
            }
        }
    }

    #[test]
    fn results_follow_batch_order_for_any_pool() {
        let sum = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                run_batches::<_, (), _>(10_000, BATCHES, |_, r| {
                    Ok(r.map(|i| (i as f64).sqrt()).sum::<f64>())
                })
                .unwrap()
            })
        };
        assert_eq!(sum(1), sum(3));
    }
}
