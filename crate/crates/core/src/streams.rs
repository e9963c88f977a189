//! Keyed random streams.
//!
//! Every noise draw comes from a ChaCha8 stream whose 256-bit key is the tuple
//! `(master seed, user, trial, PA)`. Distinct tuples give independent streams,
//! so results never depend on the order in which trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StreamKey {
    pub master_seed: u64,
    pub user: u64,
    pub trial: u64,
    pub pa: u64,
}

impl StreamKey {
    pub const fn new(master_seed: u64, user: u64, trial: u64, pa: u64) -> Self {
        Self {
            master_seed,
            user,
            trial,
            pa,
        }
    }

    pub const fn with_pa(self, pa: u64) -> Self {
        Self { pa, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        for (chunk, word) in
            seed.chunks_exact_mut(8)
                .zip([self.master_seed, self.user, self.trial, self.pa])
        {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}
