//! Reproducible random streams.
//!
//! A run seed expands into a ChaCha8 key; independent substreams are selected
//! with the cipher's 64-bit stream id. ChaCha is counter based, so the draws
//! on stream `k` never depend on how many draws other streams consumed, which
//! keeps parallel generation byte-identical to sequential generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id reserved for shuffling alternative positions.
pub const SHUFFLE_STREAM: u64 = u64::MAX;
/// Stream id reserved for the BH randomization variable.
pub const UNIFORM_STREAM: u64 = u64::MAX - 1;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a path of coordinates.
///
/// Stable across platforms and releases, unlike `std`'s hashers.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// A keyed family of independent ChaCha8 streams.
#[derive(Debug, Clone)]
pub struct StreamFamily {
    key: [u8; 32],
}

impl StreamFamily {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut s = seed;
        for chunk in key.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        Self { key }
    }

    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(id);
        rng
    }
}
