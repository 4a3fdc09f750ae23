//! Seed derivation tree.
//!
//! Every random stream in the toolkit descends from one master seed. A child
//! seed is `mix(parent ^ mix(stream_tag) ^ mix(index + 1))`, where `mix` is
//! the SplitMix64 finalizer, so per-item streams do not depend on the order
//! or thread in which items are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG used throughout the crate.
pub type QRng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn tag_hash(tag: &str) -> u64 {
    // FNV-1a, stable across platforms and releases.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Child seed for item `index` of the named stream.
pub fn derive_seed(parent: u64, stream: &str, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(tag_hash(stream)) ^ splitmix64(index.wrapping_add(1)))
}

pub fn rng_from_seed(seed: u64) -> QRng {
    QRng::seed_from_u64(seed)
}

/// RNG for item `index` of the named stream.
pub fn derive_rng(parent: u64, stream: &str, index: u64) -> QRng {
    rng_from_seed(derive_seed(parent, stream, index))
}
