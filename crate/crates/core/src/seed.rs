//! Seed derivation. Every random choice in the crate is drawn from a
//! generator seeded by `derive(root, stream, index)`, so experiments are
//! reproducible regardless of how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Child seed for `(stream, index)` under `root`.
pub fn derive(root: u64, stream: u64, index: u64) -> u64 {
    mix64(mix64(root ^ mix64(stream)) ^ index)
}

pub fn rng_from(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Generator for trial `index` of stream `stream`.
pub fn trial_rng(root: u64, stream: u64, index: u64) -> Rng {
    rng_from(derive(root, stream, index))
}

/// Named streams keep unrelated consumers of one root seed apart.
pub mod streams {
    pub const PROTOCOL: u64 = 1;
    pub const BREAKER: u64 = 2;
    pub const UNIFORM: u64 = 3;
    pub const DECIDER: u64 = 4;
    pub const EVE: u64 = 5;
    pub const GL: u64 = 6;
    pub const HASH: u64 = 7;
    pub const LEMMA5: u64 = 8;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derivation_is_stable_and_separates_streams() {
        assert_eq!(derive(7, 1, 3), derive(7, 1, 3));
        assert_ne!(derive(7, 1, 3), derive(7, 2, 3));
        assert_ne!(derive(7, 1, 3), derive(7, 1, 4));
        let a = trial_rng(1, 2, 3).next_u64();
        let b = trial_rng(1, 2, 3).next_u64();
        assert_eq!(a, b);
    }
}
