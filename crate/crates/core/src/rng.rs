//! Named, independent RNG streams derived from one master seed.
//!
//! Every consumer of randomness draws from its own ChaCha stream so that,
//! for example, changing how minibatches are shuffled never perturbs the
//! ED trajectories seen under a fixed action sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Placement = 1,
    Mobility = 2,
    ActionSampling = 3,
    Shuffle = 4,
    WeightInit = 5,
    Baseline = 6,
    EpisodeSeeds = 7,
}

pub fn stream_rng(master_seed: u64, stream: Stream) -> ChaCha8Rng {
    indexed_stream_rng(master_seed, stream, 0)
}

/// Stream `stream` for the `index`-th parallel consumer (env instance,
/// agent, ...).
pub fn indexed_stream_rng(master_seed: u64, stream: Stream, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((stream as u64) << 32) | u64::from(index));
    rng
}

/// SplitMix64 finalizer; used to derive per-episode seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
