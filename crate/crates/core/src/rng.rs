//! Per-path random streams.
//!
//! Every path owns a ChaCha stream selected by `(seed, purpose, path_index)`,
//! so results never depend on how paths are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Separate purposes never share draws, which
/// keeps the birth time fixed when the Brownian grid is refined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Brownian = 0,
    BirthTime = 1,
    Flow = 2,
    Lab = 3,
}

pub fn stream(seed: u64, purpose: Purpose, path_index: u64) -> ChaCha8Rng {
    // Mix the purpose into the key; the path picks the ChaCha stream.
    let key = seed ^ (purpose as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(path_index);
    rng
}
