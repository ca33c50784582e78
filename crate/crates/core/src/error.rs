//! Error types shared across the simulator.

use thiserror::Error;

/// Rejection of an invalid simulation configuration. Every variant names the
/// offending field so callers can surface actionable diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("channel {channel}: occupancy must lie in [0, 1), got {value}")]
    OccupancyOutOfRange { channel: usize, value: f64 },

    #[error("channel {channel}: base_reception must lie in [0, 1], got {value}")]
    BaseReceptionOutOfRange { channel: usize, value: f64 },

    #[error(
        "channel {channel}: burst_len must be at least {min} for this occupancy \
         (transition probabilities would leave [0, 1]), got {value}"
    )]
    BurstLenTooSmall {
        channel: usize,
        value: f64,
        min: f64,
    },

    #[error("channels: at least one channel is required")]
    NoChannels,

    #[error("n_nodes: at least 2 nodes are required, got {value}")]
    TooFewNodes { value: usize },

    #[error("slots_per_trial: must be at least 1")]
    NoSlots,

    #[error("n_trials: must be at least 1")]
    NoTrials,

    #[error("sensing window: must be at least 1 slot")]
    EmptySensingWindow,

    #[error("topology: {message}")]
    BadTopology { message: String },
}

/// Failure of a metrics computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("confidence interval requires at least one sample")]
    EmptySamples,

    #[error("closed-form oracle requires perfect sensing")]
    OracleNeedsPerfectSensing,

    #[error("closed-form oracle requires a full-mesh topology")]
    OracleNeedsFullMesh,
}
