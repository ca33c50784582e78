//! Channels, primary-radio activity, and per-channel reception probability.
//!
//! Each channel carries an independent two-state (busy/idle) discrete-time
//! chain modelling primary-radio activity. The chain is parameterized by its
//! stationary busy probability (`occupancy`) and its mean busy-burst length in
//! slots (`burst_len`), which map onto the idle->busy and busy->idle
//! transition probabilities in closed form. Message losses combine two
//! mechanisms: blocking by a busy primary radio, and a per-channel base
//! reception probability.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::ConfigError;

/// 1-based identifier of a channel in the set `{1, ..., N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelId(usize);

impl ChannelId {
    /// Wraps a 1-based channel id.
    pub fn new(id: usize) -> Self {
        assert!(id >= 1, "channel ids are 1-based");
        ChannelId(id)
    }

    /// Converts a 0-based channel index into its id.
    pub fn from_index(index: usize) -> Self {
        ChannelId(index + 1)
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// 0-based index into per-channel vectors.
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Ground-truth parameters of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Stationary probability the primary radio occupies the channel.
    pub occupancy: f64,
    /// Mean primary-radio busy-burst duration in slots.
    pub burst_len: f64,
    /// Probability a transmitted message is received, given the receiver is
    /// tuned to the channel and the primary radio is idle.
    pub base_reception: f64,
}

impl ChannelParams {
    pub fn new(occupancy: f64, burst_len: f64, base_reception: f64) -> Result<Self, ConfigError> {
        let params = ChannelParams {
            occupancy,
            burst_len,
            base_reception,
        };
        params.validate(0)?;
        Ok(params)
    }

    /// Checks all field invariants; `channel` is the 1-based id used in
    /// error messages.
    pub fn validate(&self, channel: usize) -> Result<(), ConfigError> {
        if !self.occupancy.is_finite() || !(0.0..1.0).contains(&self.occupancy) {
            return Err(ConfigError::OccupancyOutOfRange {
                channel,
                value: self.occupancy,
            });
        }
        if !self.base_reception.is_finite() || !(0.0..=1.0).contains(&self.base_reception) {
            return Err(ConfigError::BaseReceptionOutOfRange {
                channel,
                value: self.base_reception,
            });
        }
        let floor = burst_len_floor(self.occupancy);
        if !self.burst_len.is_finite() || self.burst_len < floor {
            return Err(ConfigError::BurstLenTooSmall {
                channel,
                value: self.burst_len,
                min: floor,
            });
        }
        Ok(())
    }
}

/// Smallest mean burst length for which both chain transition probabilities
/// stay in `[0, 1]`: `max(1, occupancy / (1 - occupancy))`.
pub fn burst_len_floor(occupancy: f64) -> f64 {
    if occupancy >= 1.0 {
        f64::INFINITY
    } else {
        (occupancy / (1.0 - occupancy)).max(1.0)
    }
}

/// Transition probabilities of one channel's busy/idle chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTransition {
    /// Probability an idle channel turns busy in the next slot.
    pub idle_to_busy: f64,
    /// Probability a busy channel turns idle in the next slot.
    pub busy_to_idle: f64,
}

/// Maps `(occupancy, burst_len)` onto chain transition probabilities.
///
/// The busy->idle probability is `1 / burst_len` (geometric bursts of mean
/// `burst_len`), and the idle->busy probability is chosen so that the chain's
/// stationary busy probability equals `occupancy` exactly.
pub fn stationary_to_transitions(
    occupancy: f64,
    burst_len: f64,
) -> Result<ChannelTransition, ConfigError> {
    if !occupancy.is_finite() || !(0.0..1.0).contains(&occupancy) {
        return Err(ConfigError::OccupancyOutOfRange {
            channel: 0,
            value: occupancy,
        });
    }
    let floor = burst_len_floor(occupancy);
    if !burst_len.is_finite() || burst_len < floor {
        return Err(ConfigError::BurstLenTooSmall {
            channel: 0,
            value: burst_len,
            min: floor,
        });
    }
    // The feasibility check above guarantees both probabilities lie in
    // [0, 1] mathematically; clamping removes rounding dust at the boundary
    // (burst_len equal to the floor can produce 1.0 + epsilon).
    let busy_to_idle = (1.0 / burst_len).min(1.0);
    let idle_to_busy = (occupancy / (burst_len * (1.0 - occupancy))).min(1.0);
    Ok(ChannelTransition {
        idle_to_busy,
        busy_to_idle,
    })
}

/// Current-slot primary-radio activity, one busy flag per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrState {
    busy: Vec<bool>,
}

impl PrState {
    /// Draws the stationary initial state: each channel busy with probability
    /// equal to its occupancy.
    pub fn stationary<R: Rng>(channels: &[ChannelParams], rng: &mut R) -> Self {
        let busy = channels
            .iter()
            .map(|c| rng.gen_bool(c.occupancy))
            .collect();
        PrState { busy }
    }

    /// All channels idle; used by tests that drive the chain by hand.
    pub fn all_idle(n_channels: usize) -> Self {
        PrState {
            busy: vec![false; n_channels],
        }
    }

    pub fn n_channels(&self) -> usize {
        self.busy.len()
    }

    pub fn is_busy(&self, channel: ChannelId) -> bool {
        self.busy[channel.index()]
    }

    /// Advances every channel one slot: a busy channel stays busy with
    /// probability `1 - busy_to_idle`, an idle one turns busy with
    /// probability `idle_to_busy`. Channels are resampled independently in
    /// id order.
    pub fn advance<R: Rng>(&mut self, transitions: &[ChannelTransition], rng: &mut R) {
        assert_eq!(
            transitions.len(),
            self.busy.len(),
            "one transition pair per channel"
        );
        for (flag, t) in self.busy.iter_mut().zip(transitions) {
            *flag = if *flag {
                !rng.gen_bool(t.busy_to_idle)
            } else {
                rng.gen_bool(t.idle_to_busy)
            };
        }
    }
}

/// Marginal per-slot probability a message on this channel is received.
///
/// With `pr_blocking` the message is lost whenever the primary radio is busy,
/// so the base reception probability is thinned by the idle probability.
pub fn effective_reception_prob(params: &ChannelParams, pr_blocking: bool) -> f64 {
    if pr_blocking {
        params.base_reception * (1.0 - params.occupancy)
    } else {
        params.base_reception
    }
}
