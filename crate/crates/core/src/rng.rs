//! Reproducible random streams.
//!
//! A single master seed deterministically derives one independent ChaCha
//! stream per draw index. Results are therefore identical regardless of
//! evaluation order or thread count, and draws never overlap.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// Stream index reserved for frozen-codebook generation so it can never
/// collide with a per-draw stream.
pub const CODEBOOK_STREAM: u64 = u64::MAX;

/// Derives the independent sub-stream for one draw index.
pub fn substream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
