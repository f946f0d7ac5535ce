//! Counter-based random streams.
//!
//! A batch of `n` draws is cut into fixed-size chunks. Chunk `k` of lane `l`
//! under seed `s` reads the ChaCha8 stream `k` keyed by `mix(s, l)`, so the
//! output is the same however the chunks are scheduled across workers.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent sub-seed for a named lane.
pub fn derive_seed(seed: u64, lane: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(lane.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Generator for one chunk.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Values of one batch plus the number of entries flagged by the sampler
/// (for instance paths that hit the step limit).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub values: Vec<f64>,
    pub flagged: usize,
}

/// A sampler that fills one chunk from one stream.
pub trait ChunkedSampler: Sync {
    /// Fills `out`; returns how many entries were flagged.
    fn fill(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<usize>;

    fn chunk_len(&self) -> usize {
        4096
    }
}

/// Chunk layout of a batch of `n`: `(index, start, len)`.
pub fn chunks(n: usize, chunk_len: usize) -> impl Iterator<Item = (u64, usize, usize)> {
    let chunk_len = chunk_len.max(1);
    (0..n.div_ceil(chunk_len)).map(move |k| {
        let start = k * chunk_len;
        (k as u64, start, chunk_len.min(n - start))
    })
}

/// Single-threaded driver; parallel drivers must reproduce it exactly.
pub fn sample_serial<S: ChunkedSampler + ?Sized>(sampler: &S, n: usize, seed: u64) -> Result<Batch> {
    let mut values = vec![0.0; n];
    let mut flagged = 0;
    for (k, start, len) in chunks(n, sampler.chunk_len()) {
        let mut rng = chunk_rng(seed, k);
        flagged += sampler.fill(&mut rng, &mut values[start..start + len])?;
    }
    Ok(Batch { values, flagged })
}
