//! Seeded random streams.
//!
//! Every stochastic operation takes an explicit 64-bit seed. Sub-streams
//! (per pixel, per measurement) are derived by hashing the parent seed with
//! a key, so results do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `(seed, key[0], key[1], ...)`.
pub fn derive_seed(seed: u64, key: &[u64]) -> u64 {
    key.iter().fold(mix64(seed), |acc, &k| mix64(acc ^ mix64(k)))
}

/// Stream keys used by the measurement layer.
pub(crate) mod stream {
    pub const FRINGE: u64 = 1;
    pub const PREDICTABILITY: u64 = 2;
    pub const CALIBRATION: u64 = 3;
    pub const PIXEL: u64 = 4;
}

/// One Poisson draw with mean `lambda`; zero mean gives zero.
pub fn poisson(rng: &mut SimRng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(lambda).expect("finite positive Poisson mean");
    dist.sample(rng) as u64
}
