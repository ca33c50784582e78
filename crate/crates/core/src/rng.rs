//! Deterministic derivation of per-trial random streams.
//!
//! Every random draw in the simulator comes from a ChaCha8 stream whose seed
//! is derived from `(master_seed, trial_index, stream role)` by the SplitMix64
//! finalizer. The derivation below is part of the output contract: changing it
//! changes every simulated result, so it is frozen.
//!
//! Each trial owns three independent substreams (primary-radio activity,
//! channel selection, reception losses). Keeping the roles separate means two
//! experiments that differ only in strategy see identical primary-radio
//! trajectories and identical loss draws, which both sharpens strategy
//! comparisons and makes single-channel runs coincide exactly across
//! strategies.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Role of a derived random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    /// Primary-radio busy/idle evolution (and the stationary initial draw).
    PrActivity,
    /// Channel selection draws (only the random strategy consumes these).
    Selection,
    /// Per-receiver reception loss draws.
    Reception,
    /// Channel parameter sampling from a generation rule.
    ChannelSampling,
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::PrActivity => 0x01,
            StreamRole::Selection => 0x02,
            StreamRole::Reception => 0x03,
            StreamRole::ChannelSampling => 0x04,
        }
    }
}

/// SplitMix64 finalizer (Steele, Lea, Flood, "Fast splittable pseudorandom
/// number generators").
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of one substream: three chained SplitMix64 rounds folding
/// in the master seed, the trial index, and the stream tag.
pub fn derive_stream_seed(master_seed: u64, trial_index: u64, role: StreamRole) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ trial_index) ^ role.tag())
}

/// Instantiates the derived substream.
pub fn stream(master_seed: u64, trial_index: u64, role: StreamRole) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_stream_seed(master_seed, trial_index, role))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible() {
        let mut a = stream(42, 7, StreamRole::PrActivity);
        let mut b = stream(42, 7, StreamRole::PrActivity);
        for _ in 0..32 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn roles_and_trials_yield_distinct_streams() {
        let base = derive_stream_seed(42, 7, StreamRole::PrActivity);
        assert_ne!(base, derive_stream_seed(42, 7, StreamRole::Selection));
        assert_ne!(base, derive_stream_seed(42, 7, StreamRole::Reception));
        assert_ne!(base, derive_stream_seed(42, 8, StreamRole::PrActivity));
        assert_ne!(base, derive_stream_seed(43, 7, StreamRole::PrActivity));
    }

    #[test]
    fn derivation_is_frozen() {
        // Pinned outputs of the documented SplitMix64 chain. A change here is
        // a breaking change to every recorded result.
        assert_eq!(
            derive_stream_seed(0, 0, StreamRole::PrActivity),
            0x2f32_a784_96c6_7c60
        );
        assert_eq!(
            derive_stream_seed(42, 500, StreamRole::Reception),
            0xc672_3b52_9742_5557
        );
    }
}
