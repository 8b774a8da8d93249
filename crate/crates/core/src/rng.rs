//! Deterministic, portable pseudo-random numbers.
//!
//! The generator is SplitMix64 (Steele, Lea and Vigna's `splitmix64`): a
//! 64-bit Weyl sequence finalized with a two-round multiply-xorshift mix.
//! The whole algorithm is pinned here so that a given `(seed, index)` pair
//! produces the same integer stream on every platform; the experiment
//! harness depends on that for reproducible sample sets.

const WEYL_INCREMENT: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_2: u64 = 0x94D0_49BB_1331_11EB;
/// 2^-53, the spacing of doubles in [0.5, 1).
const F64_SCALE: f64 = 1.0 / 9_007_199_254_740_992.0;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(WEYL_INCREMENT);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(MIX_1);
        z = (z ^ (z >> 27)).wrapping_mul(MIX_2);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * F64_SCALE
    }
}
