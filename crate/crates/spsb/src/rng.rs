//! Tiny deterministic pseudo-random source for reproducible verification
//! sweeps (random angles, random susceptibility ratios, random parameter
//! points).
//!
//! The verification suite must be byte-for-byte reproducible across runs and
//! must not depend on an external RNG crate, so we use the SplitMix64
//! generator: a 64-bit counter hashed through a fixed avalanche function.
//! Statistical quality is far beyond what parameter sampling needs.

/// SplitMix64 stream seeded with a fixed constant per use site.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Creates a stream from a seed. Distinct use sites should use distinct
    /// seeds so edits to one sweep do not shift the samples of another.
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform double in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
