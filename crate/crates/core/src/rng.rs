//! Seeded counter-based random streams.
//!
//! Every Monte Carlo draw comes from a ChaCha8 generator keyed by the user
//! seed and positioned on stream `(experiment << 32) | block`. Replicates are
//! grouped into fixed-size blocks, so results do not depend on how blocks are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Replicates drawn from one stream.
pub const BLOCK_SIZE: usize = 1024;

pub fn stream_id(experiment: u32, block: u32) -> u64 {
    (u64::from(experiment) << 32) | u64::from(block)
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
