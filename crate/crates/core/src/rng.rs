//! Seeded, splittable random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator addressed by
//! `(seed, domain, stream)`. ChaCha is counter based: the key is derived from
//! the user seed and a domain tag, and the 64-bit stream id selects an
//! independent keystream. Work items (permutation chunks, bootstrap resamples,
//! generated columns) own their stream by index, so results never depend on
//! how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates the uses of one user seed so that, for example, bootstrap
/// resample 3 and generated column 3 never share a keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Simulation,
    Permutations,
    Resampling,
    Bandwidth,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Simulation => 0x5349_4d55_4c41_5445,
            Domain::Permutations => 0x5045_524d_5554_4553,
            Domain::Resampling => 0x5245_5341_4d50_4c45,
            Domain::Bandwidth => 0x4241_4e44_5749_4454,
        }
    }
}

/// SplitMix64 finalizer, used only to derive keys.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for `stream` under `(seed, domain)`.
pub fn stream(seed: u64, domain: Domain, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ domain.tag()));
    rng.set_stream(stream);
    rng
}

/// A child seed, for example to separate training and test draws.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index))
}
