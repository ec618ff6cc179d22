//! Reproducible random streams.
//!
//! Every stochastic stage draws from ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, which is specified independently of the
//! platform. Per-item streams mix the global seed with a 64-bit FNV-1a hash
//! of the item key so results do not depend on processing order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Stream dedicated to one key (e.g. a table id) under a global seed.
pub fn keyed_stream(seed: u64, key: &str) -> StreamRng {
    stream(mix(seed ^ mix(fnv1a64(key.as_bytes()))))
}
