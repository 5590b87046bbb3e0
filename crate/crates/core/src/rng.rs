//! Seeded randomness. Every consumer gets its own ChaCha8 stream derived
//! from the scenario seed, so adding draws in one phase never shifts the
//! numbers seen by another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream used by the find phase of group formation.
pub const STREAM_DISCOVERY: u64 = 1;

/// One step of the splitmix64 generator.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Owner negotiation tie-breaker for equal intents.
pub fn tie_breaker_bit(seed: u64, lower_id: u32) -> bool {
    splitmix64(seed ^ splitmix64(u64::from(lower_id))) & 1 == 1
}

#[derive(Debug, Clone)]
pub struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    /// Uniform in `[lo, hi]`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..=hi)
    }

    pub fn bit(&mut self) -> bool {
        self.0.gen()
    }
}
