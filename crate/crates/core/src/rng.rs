//! Counter-based, splittable random streams.
//!
//! A stream is a ChaCha8 keystream selected by a 64-bit seed and a 64-bit
//! stream id. Distinct stream ids under one seed are independent keystreams,
//! which is what parallel Monte Carlo uses: chunk `k` of a run always draws
//! from stream `k + 1`, so results do not depend on the number of threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Draws per chunk in parallel sampling.
pub const CHUNK: usize = 1 << 16;

/// A seeded random stream owned by one caller at a time.
#[derive(Clone, Debug)]
pub struct RandomStream {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
    splits: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            inner,
            seed,
            stream,
            splits: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derive an independent child stream. The child is keyed by a hash of
    /// (seed, stream, split index), so the parent's own output is untouched.
    pub fn split(&mut self) -> RandomStream {
        self.splits += 1;
        let key = mix(self.seed ^ mix(self.stream.wrapping_add(0x632B_E59B_D9B4_E019)))
            ^ mix(self.splits);
        RandomStream::with_stream(key, 0)
    }

    /// Uniform draw on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

// splitmix64 finalizer
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fill `count` values in parallel, chunk `k` drawing from stream `k + 1` of
/// `seed`. The output is identical for any thread count.
pub fn par_fill<F>(seed: u64, count: usize, draw: F) -> Vec<f64>
where
    F: Fn(&mut RandomStream) -> f64 + Sync,
{
    par_fill_with(seed, count, draw)
}

/// [`par_fill`] for any record type.
pub fn par_fill_with<T, F>(seed: u64, count: usize, draw: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(&mut RandomStream) -> T + Sync,
{
    use rayon::prelude::*;
    let mut out = vec![T::default(); count];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(k, chunk)| {
            let mut rng = RandomStream::with_stream(seed, k as u64 + 1);
            for slot in chunk.iter_mut() {
                *slot = draw(&mut rng);
            }
        });
    out
}
