//! Named, per-purpose random streams derived from one master seed.
//!
//! Every consumer of randomness (nest placement, GA operators, trial seeds,
//! population init) gets its own stream keyed by `(master, purpose, index)`.
//! Streams never share state, so neither evaluation order nor the number of
//! worker threads can change what a stream produces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

/// Purposes used by the orchestrator.
pub mod purpose {
    pub const INIT_POPULATION: &str = "init-population";
    pub const GA_OPERATORS: &str = "ga-operators";
    pub const NEST_PLACEMENT: &str = "nest-placement";
    pub const TRIAL: &str = "trial";
}

/// Derives a 64-bit seed for the given purpose and index.
pub fn derive_seed(master: u64, purpose: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((purpose.len() as u64).to_le_bytes());
    h.update(purpose.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
}

pub fn stream(master: u64, purpose: &str, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, purpose, index))
}

pub fn from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
