//! Seeded random streams with thread-count-independent semantics.
//!
//! Every randomized operation in this crate draws from a [`Stream`], which
//! maps a 64-bit seed to a family of independent ChaCha substreams, one per
//! fixed-size chunk of the index range. Work may be partitioned across
//! threads at chunk granularity; because substream `i` always produces the
//! draws for indices `[i*CHUNK, (i+1)*CHUNK)`, the generated values depend
//! only on the seed, never on the number of workers or the order in which
//! chunks are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of consecutive draws served by one substream.
pub const CHUNK: usize = 4096;

/// A reproducible random stream identified by a 64-bit seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    seed: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// RNG serving draw indices `[chunk*CHUNK, (chunk+1)*CHUNK)`.
    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk);
        rng
    }

    /// Derived stream for a named sub-purpose (e.g. out-of-sample validation).
    pub fn derive(&self, label: &str) -> Stream {
        Stream::new(hash64_label(self.seed, label))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic, platform-independent combiner for seed derivation.
pub fn hash64(parts: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &p in parts {
        h ^= splitmix64(p);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
        h = splitmix64(h);
    }
    h
}

/// Combines a seed with an ASCII label, for stream separation by purpose.
pub fn hash64_label(seed: u64, label: &str) -> u64 {
    let mut parts = vec![seed];
    for chunk in label.as_bytes().chunks(8) {
        let mut w = [0u8; 8];
        w[..chunk.len()].copy_from_slice(chunk);
        parts.push(u64::from_le_bytes(w));
    }
    hash64(&parts)
}

/// Number of chunks covering `count` draws.
pub fn chunk_count(count: usize) -> usize {
    count.div_ceil(CHUNK)
}
