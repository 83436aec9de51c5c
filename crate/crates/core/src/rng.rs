//! Seeded random streams.
//!
//! Every chain draws from a ChaCha20 generator keyed by the 64-bit master
//! seed. Independent chains and replicates use distinct stream indices of
//! the same key, so `(seed, stream)` fully determines a run.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type ChainRng = ChaCha20Rng;

/// Generator for stream `stream` under master seed `seed`.
pub fn chain_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
