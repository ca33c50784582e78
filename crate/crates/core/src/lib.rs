//! # crsim-core
//!
//! Discrete-time Monte Carlo simulator of channel selection in a cognitive
//! radio network.
//!
//! Licensed channels are occupied by primary radios following independent
//! busy/idle chains. Cognitive radio nodes listen on every channel, estimate
//! per-channel occupancy, and each slot pick one channel for transmitting or
//! overhearing - either adaptively, by ranking channels with the weight
//! `e^(-occupancy) * (1 - occupancy)`, or uniformly at random as a baseline.
//! Experiments average hundreds of independent trials and report per-node
//! delivery ratios and receiver counts with 95% confidence intervals,
//! together with closed-form expectations used to validate the engine.
//!
//! Main entry points:
//! - [`SimConfig`] describes an experiment; [`run_experiment`] executes it.
//! - [`run_trial`] / [`Trial`] run a single seeded trial.
//! - [`metrics::oracle_expected_delivery`] and
//!   [`metrics::oracle_expected_receivers`] give the analytic expectations
//!   for perfect sensing on a full mesh.
//!
//! Everything is deterministic: the entire output is a pure function of the
//! configuration, including under parallel trial execution.

pub mod channel;
pub mod error;
pub mod metrics;
pub mod rng;
pub mod sensing;
pub mod sim;
pub mod strategy;

pub use channel::{
    burst_len_floor, effective_reception_prob, stationary_to_transitions, ChannelId,
    ChannelParams, ChannelTransition, PrState,
};
pub use error::{ConfigError, MetricsError};
pub use metrics::{
    avg_receivers, confidence_interval, delivery_ratio, CiStat, DeliveryDenominator,
    ExperimentSummary, NodeSummary,
};
pub use sensing::{OccupancyEstimator, SensingMode, DEFAULT_WINDOW};
pub use sim::{
    run_experiment, run_trial, NodeId, SimConfig, SlotOutcome, Topology, Trial, TrialResult,
};
pub use strategy::{
    channel_weight, rank_channels, select_adaptive, select_random, ChannelWeight,
    SelectionStrategy,
};
