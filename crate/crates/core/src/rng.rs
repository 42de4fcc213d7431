//! Deterministic random-stream derivation.
//!
//! Every source of randomness in this crate is a [`ChaCha8Rng`] derived from
//! a 64-bit master seed plus a path of tags and integers (for example
//! `master / "boot" / method / replicate / n`). The derivation is a plain
//! splitmix64 chain, so streams are stable across platforms, thread counts
//! and rustc versions. Work scheduled on different threads draws from
//! different derived streams and never shares generator state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 step (Steele, Lea, Flood 2014). Bijective on u64.
#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over a byte string, used to fold tags into the stream state.
#[inline]
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// A derivation path for one random stream.
///
/// `StreamKey::new(seed).tag("boot").word(r)` always names the same stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(master_seed: u64) -> Self {
        StreamKey(splitmix64(master_seed))
    }

    /// Fold a textual purpose tag (e.g. `"data"`, `"boot"`) into the key.
    #[must_use]
    pub fn tag(self, tag: &str) -> Self {
        StreamKey(splitmix64(self.0 ^ fnv1a(tag.as_bytes())))
    }

    /// Fold an integer component (replicate index, sample size, ...) into the key.
    #[must_use]
    pub fn word(self, v: u64) -> Self {
        StreamKey(splitmix64(self.0 ^ v))
    }

    /// Instantiate the stream. The 256-bit ChaCha seed is expanded from the
    /// 64-bit key with further splitmix64 steps, independent of any seeding
    /// helper the rand crates may change between releases.
    pub fn rng(self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut s = self.0;
        for chunk in seed.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}
