//! Seeding discipline.
//!
//! Every random stream is a ChaCha8 generator (`rand_chacha::ChaCha8Rng`)
//! seeded through `SeedableRng::seed_from_u64`, which is portable across
//! platforms. Sub-seeds are derived with [`derive_seed`]: the label is hashed
//! with 64-bit FNV-1a, then the base seed, the label hash and each index are
//! folded in with the SplitMix64 finalizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in output metadata.
pub const RNG_ID: &str = "chacha8/seed_from_u64";
/// Identifier of the seed-derivation hash recorded in output metadata.
pub const SEED_HASH_ID: &str = "fnv1a64-label+splitmix64-fold";

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub fn derive_seed(base: u64, label: &str, indices: &[u64]) -> u64 {
    let mut h = splitmix64(base ^ fnv1a(label));
    for &i in indices {
        h = splitmix64(h ^ splitmix64(i));
    }
    h
}
