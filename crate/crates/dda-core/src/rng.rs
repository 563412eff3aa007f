//! Seeded stream derivation.
//!
//! Every random decision in the pipeline draws from a ChaCha stream whose
//! seed is derived from the experiment seed plus a purpose tag and the
//! relevant indices (image index, epoch, ...). Parallel or reordered
//! execution therefore cannot change any draw, and tests can replay any
//! stream from its documented derivation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags keeping unrelated streams disjoint.
pub mod stream {
    pub const MEAN_PIXEL: u64 = 1;
    pub const DONOR: u64 = 2;
    pub const AUGMENT: u64 = 3;
    pub const SHUFFLE: u64 = 4;
    pub const INIT: u64 = 5;
    pub const SYNTH_TARGET: u64 = 6;
    pub const SUBSAMPLE: u64 = 7;
    pub const PATCH_BANK: u64 = 8;
    pub const DIGITS: u64 = 9;
    pub const PCA_SUBSAMPLE: u64 = 10;
    pub const PCA_DONOR: u64 = 11;
    pub const EXPORT_DONOR: u64 = 12;
}

/// SplitMix64 finalizer; full-period bijective mixing on u64.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `tags` into `base` one at a time through the SplitMix64 finalizer.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix(base);
    for &tag in tags {
        state = splitmix(state ^ tag);
    }
    state
}

/// ChaCha stream for `(base, tags)`; the workhorse of the whole crate.
pub fn stream_rng(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derivation_is_stable_and_tag_sensitive() {
        assert_eq!(derive_seed(42, &[1, 2]), derive_seed(42, &[1, 2]));
        assert_ne!(derive_seed(42, &[1, 2]), derive_seed(42, &[2, 1]));
        assert_ne!(derive_seed(42, &[1]), derive_seed(43, &[1]));
    }

    #[test]
    fn streams_replay() {
        let a: u64 = stream_rng(7, &[stream::DONOR, 3]).gen();
        let b: u64 = stream_rng(7, &[stream::DONOR, 3]).gen();
        assert_eq!(a, b);
    }
}
