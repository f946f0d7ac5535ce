//! Parallel chunk driver.
//!
//! Chunks are scheduled on a rayon pool but each one reads its own stream,
//! so the batch is bit-identical to [`sample_serial`] for any worker count.

use levyfac_core::rng::{chunk_rng, chunks, Batch, ChunkedSampler};
use levyfac_core::Result;
use rayon::prelude::*;

pub use levyfac_core::rng::sample_serial;

/// Worker count used when none is given.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Draws `n` values on `workers` threads.
pub fn sample_parallel<S: ChunkedSampler + ?Sized>(sampler: &S, n: usize, seed: u64, workers: usize) -> Result<Batch> {
    if workers <= 1 {
        return sample_serial(sampler, n, seed);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    let mut values = vec![0.0; n];
    let layout: Vec<_> = chunks(n, sampler.chunk_len()).collect();
    let flagged = pool.install(|| {
        let mut slices = Vec::with_capacity(layout.len());
        let mut rest = values.as_mut_slice();
        for &(k, _, len) in &layout {
            let (head, tail) = rest.split_at_mut(len);
            slices.push((k, head));
            rest = tail;
        }
        slices
            .into_par_iter()
            .map(|(k, out)| {
                let mut rng = chunk_rng(seed, k);
                sampler.fill(&mut rng, out)
            })
            .collect::<Result<Vec<usize>>>()
    })?;
    Ok(Batch { values, flagged: flagged.into_iter().sum() })
}
