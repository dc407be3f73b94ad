//! Seeded counter-based random streams.
//!
//! Everything random in the crate draws from ChaCha8 keyed by a 64-bit seed.
//! Environments address the keystream by position (one draw per site rank),
//! replicas get their own stream number, so results never depend on
//! traversal order or thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream reserved for environment sampling; replicas use `replica + 1`.
const ENVIRONMENT_STREAM: u64 = 0;

/// Random source for the `index`-th draw of an environment keyed by `seed`.
pub struct IndexedUniforms {
    rng: ChaCha8Rng,
}

impl IndexedUniforms {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ENVIRONMENT_STREAM);
        IndexedUniforms { rng }
    }

    /// Uniform in `[0, 1)` at keystream position `index`.
    pub fn at(&mut self, index: u64) -> f64 {
        // an f64 draw consumes one u64 = two 32-bit words
        self.rng.set_word_pos(2 * index as u128);
        self.rng.random::<f64>()
    }
}

/// Independent generator for replica `replica` of an experiment keyed by `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica.wrapping_add(1));
    rng
}
