//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, cell, trial)`. The
//! three words are packed verbatim into the 256-bit key, so distinct triples
//! never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream for trial `trial` of cell `cell` under base seed `seed`.
pub fn stream(seed: u64, cell: u64, trial: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&cell.to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Stream used for a standalone graph sample.
pub fn single(seed: u64) -> StreamRng {
    stream(seed, u64::MAX, u64::MAX)
}
