//! Channel weighting, ranking, and selection policies.
//!
//! The adaptive policy scores each channel by `e^(-p) * (1 - p)` where `p` is
//! the node's occupancy estimate, ranks channels by descending weight, and
//! transmits or overhears on the top-ranked one. The random baseline picks a
//! channel uniformly each slot.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelId;

/// Which channel selection policy nodes follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionStrategy {
    Adaptive,
    Random,
}

impl SelectionStrategy {
    pub fn label(self) -> &'static str {
        match self {
            SelectionStrategy::Adaptive => "adaptive",
            SelectionStrategy::Random => "random",
        }
    }
}

/// A channel together with its selection weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelWeight {
    pub channel: ChannelId,
    pub weight: f64,
}

/// Selection weight of a channel with estimated occupancy `p_hat`:
/// `e^(-p_hat) * (1 - p_hat)`, the occupancy penalty scaled by the fraction
/// of time the channel is free for cognitive use. Strictly decreasing on
/// `[0, 1]`, with weight 1 at an always-free channel and 0 at a saturated
/// one.
pub fn channel_weight(p_hat: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&p_hat),
        "occupancy estimate out of [0, 1]: {p_hat}"
    );
    (-p_hat).exp() * (1.0 - p_hat)
}

/// Weights every channel, ordered from best to worst.
///
/// Sorting compares estimates rather than the (already rounded) weights:
/// the weight is strictly decreasing in the estimate, so ascending-estimate
/// order is exactly descending-weight order, with ties broken by ascending
/// channel id. `estimates[i]` belongs to channel `i + 1`.
pub fn weigh_channels(estimates: &[f64]) -> Vec<ChannelWeight> {
    assert!(!estimates.is_empty(), "channel set must be non-empty");
    let mut weighted: Vec<(f64, ChannelWeight)> = estimates
        .iter()
        .enumerate()
        .map(|(i, &p_hat)| {
            (
                p_hat,
                ChannelWeight {
                    channel: ChannelId::from_index(i),
                    weight: channel_weight(p_hat),
                },
            )
        })
        .collect();
    weighted.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("estimates are finite")
            .then(a.1.channel.cmp(&b.1.channel))
    });
    weighted.into_iter().map(|(_, w)| w).collect()
}

/// Channel ids in decreasing order of availability.
pub fn rank_channels(estimates: &[f64]) -> Vec<ChannelId> {
    weigh_channels(estimates).iter().map(|w| w.channel).collect()
}

/// The best weighted channel: head of the ranking, computed in a single
/// pass. The weight is strictly decreasing in the estimate, so the highest
/// weight belongs to the lowest estimate (lowest id on ties) and the same
/// comparison as `rank_channels` applies without allocating.
pub fn select_adaptive(estimates: &[f64]) -> ChannelId {
    assert!(!estimates.is_empty(), "channel set must be non-empty");
    let mut best_index = 0;
    for (i, &p_hat) in estimates.iter().enumerate() {
        assert!(
            (0.0..=1.0).contains(&p_hat),
            "occupancy estimate out of [0, 1]: {p_hat}"
        );
        if p_hat < estimates[best_index] {
            best_index = i;
        }
    }
    ChannelId::from_index(best_index)
}

/// Uniform draw over `{1, ..., n_channels}`.
pub fn select_random<R: Rng>(n_channels: usize, rng: &mut R) -> ChannelId {
    assert!(n_channels >= 1, "channel set must be non-empty");
    ChannelId::new(rng.gen_range(1..=n_channels))
}
