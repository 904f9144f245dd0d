//! Counter-based seed derivation.
//!
//! Every random quantity descends from a master seed through a named stream
//! and an index, so any stage can be re-run in isolation and results do not
//! depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG used for dealing and for stochastic rules.
pub type GameRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Deal = 1,
    Seat = 2,
    Rules = 3,
    Evolution = 4,
    Evaluation = 5,
    Matchup = 6,
    Reevaluation = 7,
    Corpus = 8,
    Agreement = 9,
    MetaEval = 10,
    Sampling = 11,
    CrossPlay = 12,
    SeedList = 13,
    Play = 14,
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `(parent, stream, index)`.
#[inline]
pub fn derive(parent: u64, stream: Stream, index: u64) -> u64 {
    let a = splitmix64(parent ^ (stream as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(a ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// `n` game seeds for slot `index` of `stream`.
pub fn seed_list(master: u64, stream: Stream, index: u64, n: usize) -> Vec<u64> {
    let base = derive(master, stream, index);
    (0..n as u64).map(|k| derive(base, Stream::SeedList, k)).collect()
}

pub fn rng_from(seed: u64) -> GameRng {
    GameRng::seed_from_u64(seed)
}
