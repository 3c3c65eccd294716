//! Deterministic, splittable random streams.
//!
//! Every consumer of randomness gets its own ChaCha8 stream keyed by
//! `(seed, replicate, purpose)`. Environment draws never share a stream with
//! policy draws, so swapping the policy leaves the environment untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Purpose {
    /// Per-replicate draw of the hidden probability profile.
    Profile = 1,
    /// Bernoulli responses of the arm population.
    Environment = 2,
    /// Policy-internal randomness (tie breaks, posterior samples).
    Policy = 3,
    /// True fatigue ratios of the population.
    Fatigue = 4,
    /// Tie breaks of a standalone oracle call.
    Ties = 5,
    /// Synthetic load generation.
    Load = 6,
}

const PURPOSE_BITS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub replicate: u64,
    pub purpose: Purpose,
}

impl RngStream {
    pub fn new(seed: u64, replicate: u64, purpose: Purpose) -> Self {
        Self {
            seed,
            replicate,
            purpose,
        }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((self.replicate << PURPOSE_BITS) | self.purpose as u64);
        rng
    }
}
