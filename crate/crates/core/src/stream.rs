//! Deterministic random substreams.
//!
//! Every stochastic quantity in the pipeline draws from a stream keyed by the
//! master seed plus a fixed label path (e.g. `(seed, MEASUREMENT, k, t)`).
//! Results are therefore identical regardless of scheduling order or thread
//! count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const LINK_BS_IRS: u64 = 0x01;
pub const LINK_IRS_RX: u64 = 0x02;
pub const TRAINING: u64 = 0x03;
pub const MEASUREMENT: u64 = 0x04;
pub const OPTIMIZER: u64 = 0x05;
pub const RMS_DRAW: u64 = 0x06;
pub const ACSM: u64 = 0x07;
pub const EVAL: u64 = 0x08;
pub const REPETITION: u64 = 0x09;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Fold a label path into a single 64-bit stream key.
pub fn stream_key(seed: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(seed);
    for &t in tags {
        state = splitmix64(state ^ t.wrapping_mul(0xd1b54a32d192ed03));
    }
    state
}

/// RNG for the substream identified by `(seed, tags)`.
pub fn substream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, tags))
}
