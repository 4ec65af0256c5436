//! Deterministic random generation for scenario constructors.
//!
//! Scenario files embed seeds, and regenerating from a seed must produce
//! bit-identical values on every platform and in every future release,
//! because golden outputs and shared scenario files both depend on it. The
//! generator is therefore pinned here instead of delegated to a crate whose
//! stream might change between versions: SplitMix64, whose whole algorithm
//! is the dozen lines below and whose reference outputs are published, so
//! any other implementation can reproduce scenario data exactly.

/// SplitMix64: state advances by a fixed odd constant, and each output is
/// the state passed through two xor-multiply mixing rounds.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1): the top 53 bits of the next output, scaled by
    /// 2^-53 so every representable value is hit with equal probability.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi): affine map of [`Self::next_f64`].
    pub fn next_in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }
}
