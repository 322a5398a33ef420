//! Splittable deterministic random streams.
//!
//! Every random choice in the toolkit is drawn from a [`DeterministicRng`]
//! keyed by `(master_seed, stream_index)`. Streams for different batch items
//! are derived by mixing indices into the seed, so results never depend on
//! which worker ran an item or in which order.

use rand::distr::uniform::{SampleRange, SampleUniform};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one 64-bit seed. Order matters.
pub fn mix_seed(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &w| mix64(acc ^ mix64(w)))
}

/// Seed for item `item_index` of plan entry `entry_index`.
pub fn item_seed(master_seed: u64, entry_index: u64, item_index: u64) -> u64 {
    mix_seed(&[master_seed, entry_index, item_index])
}

#[derive(Debug, Clone)]
pub struct DeterministicRng {
    master_seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
}

impl DeterministicRng {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
            inner: ChaCha8Rng::seed_from_u64(mix_seed(&[master_seed, stream_index])),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Independent child stream; does not advance `self`.
    pub fn split(&self, child: u64) -> Self {
        Self::new(
            mix_seed(&[self.master_seed, self.stream_index]),
            child,
        )
    }

    pub fn range<T, R>(&mut self, range: R) -> T
    where
        T: SampleUniform,
        R: SampleRange<T>,
    {
        self.inner.random_range(range)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        self.inner.random_bool(p)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn byte(&mut self) -> u8 {
        self.inner.random::<u8>()
    }
}

impl RngCore for DeterministicRng {
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
