//! Seed derivation for reproducible, order-independent Monte Carlo runs.
//!
//! A single top-level seed is split into sub-streams by hashing it together
//! with a stream tag and an index path (trial, user, ...). Each sub-stream
//! feeds its own ChaCha8 generator, so trial `t` draws the same numbers no
//! matter which thread runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every random draw in the crate.
pub type SimRng = ChaCha8Rng;

/// Stream tags keep unrelated uses of the same index path apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Placement = 1,
    Channel = 2,
    Training = 3,
    Estimation = 4,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed`, a stream tag and an index path.
pub fn split_seed(seed: u64, stream: Stream, path: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(stream as u64));
    for &p in path {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0xD1B5_4A32_D192_ED03)));
    }
    h
}

/// Generator for the sub-stream `(stream, path)` of `seed`.
pub fn sub_rng(seed: u64, stream: Stream, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(split_seed(seed, stream, path))
}
