//! Reproducible random streams.
//!
//! Every stream is ChaCha20 (RFC 7539 block function, 20 rounds) keyed by
//! expanding the 64-bit seed with the PCG32-based `seed_from_u64` of
//! `rand_core`. Independent streams of one master seed select the ChaCha
//! stream word, so stream `i` of seed `s` never overlaps stream `j != i`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::split(seed, 0)
    }

    /// Stream `index` of the master `seed`; use one per thread.
    pub fn split(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Self { seed, stream: index, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
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
