//! Seeded, hierarchically keyed random streams.
//!
//! Every stochastic task derives its own stream from the run seed plus a
//! short tag path (timestamp, community id, sample index, ...), so results
//! never depend on scheduling order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a tag path into a 64-bit sub-seed.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn stream(seed: u64, tags: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tags))
}

// Tag namespaces, kept distinct so streams for different purposes never alias.
pub(crate) const TAG_STATIC: u64 = 0x5354;
pub(crate) const TAG_INTRA: u64 = 0x494E_5452;
pub(crate) const TAG_INTER: u64 = 0x494E_5445;
pub(crate) const TAG_STEP: u64 = 0x5354_4550;
pub(crate) const TAG_SAMPLE: u64 = 0x534D_504C;
pub(crate) const TAG_HAY: u64 = 0x0048_4159;
