//! Keyed random streams.
//!
//! Every random draw in the library comes from a ChaCha8 stream selected by
//! `(seed, domain, a, b, c)`. The key is built from the seed and the domain
//! tag; the 64-bit ChaCha stream id packs the three indices; the block
//! counter inside ChaCha plays the role of the draw counter. A task can
//! therefore reconstruct its stream from its own indices, independent of
//! which thread runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest replicate index representable in a stream id.
pub const MAX_REPLICATES: usize = (1 << 20) - 1;
const MAX_OUTER: u64 = (1 << 24) - 1;

/// Separates the streams of unrelated consumers sharing one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Bootstrap = 0x6273_7472_6170_0001,
    Folds = 0x666f_6c64_7300_0002,
    Simulation = 0x7369_6d75_6c00_0003,
}

pub fn stream(seed: u64, domain: Domain, a: usize, b: usize, c: usize) -> ChaCha8Rng {
    assert!(
        (a as u64) <= MAX_OUTER && b <= MAX_REPLICATES && c <= MAX_REPLICATES,
        "stream index out of range: ({a}, {b}, {c})"
    );
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(((a as u64) << 40) | ((b as u64) << 20) | c as u64);
    rng
}

/// Stream of inner replicate `inner` of outer replicate `outer` at design
/// point index `point`.
pub fn bootstrap_stream(seed: u64, point: usize, outer: usize, inner: usize) -> ChaCha8Rng {
    stream(seed, Domain::Bootstrap, point, outer, inner)
}
