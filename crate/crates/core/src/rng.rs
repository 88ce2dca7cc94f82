//! Counter-based random streams.
//!
//! Every stochastic component draws from a ChaCha8 stream keyed by
//! `(seed, domain)` and selected by a stream index, so stream `i` never depends
//! on how many other streams exist or on which thread consumes it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sketch sampling: one stream per sketch index.
pub const DOMAIN_SKETCH: u64 = 0x736b_6574_6368;
/// Monte-Carlo cascades: one stream per trial index.
pub const DOMAIN_CASCADE: u64 = 0x6361_7363_6164;
/// Query group sampling in sweeps.
pub const DOMAIN_GROUPS: u64 = 0x6772_6f75_7073;
/// Synthetic graph generation.
pub const DOMAIN_SYNTH: u64 = 0x73_796e_7468;

pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
