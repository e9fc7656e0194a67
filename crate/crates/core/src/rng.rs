//! Counter-based seed derivation.
//!
//! Every random stream in the crate is keyed by `(root seed, component tag,
//! index)`. Streams never share state, so adding a component or an
//! observable leaves every other stream untouched, and parallel work units
//! can regenerate their own randomness without coordination.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the tag bytes.
fn tag_hash(tag: &str) -> u64 {
    tag.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed for stream `index` of component `tag` under `root`.
pub fn derive_seed(root: u64, tag: &str, index: u64) -> u64 {
    mix64(mix64(root ^ tag_hash(tag)).wrapping_add(mix64(index)))
}

pub fn stream(root: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, tag, index))
}

/// Uniform `[0, 1)` double from 64 random bits (53-bit mantissa).
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
