//! Counter-based random streams.
//!
//! Every random draw is a pure function of a seed and a small tuple of
//! counters, so results do not depend on iteration order or on how work is
//! split across threads.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for substream `index` of `seed`.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(
        mix64(seed.wrapping_add(GOLDEN))
            ^ index
                .wrapping_mul(GOLDEN)
                .wrapping_add(0x632B_E59B_D9B4_E019),
    )
}

/// Uniform draw in `[0, 1)` for `(seed, vertex, round)`.
#[inline]
pub fn uniform(seed: u64, vertex: u64, round: u64) -> f64 {
    let bits = derive_seed(derive_seed(seed, vertex), round);
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
