//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha20 seeded explicitly, so a
//! seed fixes the output bit for bit on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Child seed for stream `index` of `seed` (replicates, rows, blocks).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fill `out` with standard normal draws.
pub fn fill_normal(rng: &mut Rng, out: &mut [f64]) {
    use rand_distr::{Distribution, StandardNormal};
    for x in out.iter_mut() {
        *x = StandardNormal.sample(rng);
    }
}
