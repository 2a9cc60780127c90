//! Seed derivation for reproducible, order-independent random streams.
//!
//! Every random object in the crate is drawn from a ChaCha8 stream keyed by
//! a 64-bit seed obtained by mixing a parent seed with an index. Streams for
//! different indices are independent of the order in which they are used, so
//! parallel and serial runs produce identical results.
//!
//! The mixer is the SplitMix64 finalizer (Steele, Lea & Flood 2014):
//!
//! ```text
//! z = x + 0x9E3779B97F4A7C15
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z ^ (z >> 31)
//! ```
//!
//! and `mix_seed(parent, index) = splitmix64(parent ^ splitmix64(index))`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
pub const SPLITMIX_MUL1: u64 = 0xBF58_476D_1CE4_E5B9;
pub const SPLITMIX_MUL2: u64 = 0x94D0_49BB_1331_11EB;

/// Domain tags keep streams for different purposes apart even when they
/// share a parent seed and index.
pub mod domain {
    pub const LIFT_EDGE: u64 = 0x6c69_6674;
    pub const TRIAL: u64 = 0x7472_6961;
    pub const LANCZOS_START: u64 = 0x6c61_6e63;
    pub const SAMPLING: u64 = 0x7361_6d70;
}

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(SPLITMIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(SPLITMIX_MUL1);
    z = (z ^ (z >> 27)).wrapping_mul(SPLITMIX_MUL2);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` and `index`.
#[inline]
pub fn mix_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index))
}

/// A ChaCha8 stream for `(parent, domain, index)`.
pub fn stream(parent: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(mix_seed(parent, domain), index))
}
