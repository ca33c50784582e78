//! Slotted trial execution and experiment orchestration.
//!
//! A trial runs a fixed number of slots. Each slot advances every channel's
//! primary-radio state, lets one node broadcast (round-robin) on the channel
//! its strategy picks, lets every other node pick an overhearing channel with
//! the same strategy, and resolves receptions. Experiments average many
//! independent trials; trials may run in parallel but always aggregate in
//! trial-index order, so results depend only on the configuration.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::channel::{
    stationary_to_transitions, ChannelId, ChannelParams, ChannelTransition, PrState,
};
use crate::error::ConfigError;
use crate::metrics::{self, DeliveryDenominator, ExperimentSummary};
use crate::rng::{stream, StreamRole};
use crate::sensing::{OccupancyEstimator, SensingMode};
use crate::strategy::{select_adaptive, select_random, SelectionStrategy};

/// 1-based identifier of a CR node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(usize);

impl NodeId {
    pub fn new(id: usize) -> Self {
        assert!(id >= 1, "node ids are 1-based");
        NodeId(id)
    }

    pub fn from_index(index: usize) -> Self {
        NodeId(index + 1)
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which node pairs are within transmission range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Topology {
    /// Every node hears every other node.
    FullMesh,
    /// Explicit symmetric adjacency matrix, indexed by node index.
    Explicit(Vec<Vec<bool>>),
}

impl Topology {
    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        if a == b {
            return false;
        }
        match self {
            Topology::FullMesh => true,
            Topology::Explicit(matrix) => matrix[a.index()][b.index()],
        }
    }

    pub fn validate(&self, n_nodes: usize) -> Result<(), ConfigError> {
        let Topology::Explicit(matrix) = self else {
            return Ok(());
        };
        if matrix.len() != n_nodes || matrix.iter().any(|row| row.len() != n_nodes) {
            return Err(ConfigError::BadTopology {
                message: format!("adjacency matrix must be {n_nodes}x{n_nodes}"),
            });
        }
        for i in 0..n_nodes {
            if matrix[i][i] {
                return Err(ConfigError::BadTopology {
                    message: format!("node {} is adjacent to itself", i + 1),
                });
            }
            for j in 0..i {
                if matrix[i][j] != matrix[j][i] {
                    return Err(ConfigError::BadTopology {
                        message: format!("adjacency of nodes {} and {} is asymmetric", j + 1, i + 1),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_nodes: usize,
    pub channels: Vec<ChannelParams>,
    pub strategy: SelectionStrategy,
    pub sensing: SensingMode,
    /// Whether a busy primary radio destroys the slot's message.
    pub pr_blocking: bool,
    pub slots_per_trial: usize,
    pub n_trials: usize,
    pub master_seed: u64,
    pub topology: Topology,
    pub delivery_denominator: DeliveryDenominator,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_nodes: 10,
            channels: Vec::new(),
            strategy: SelectionStrategy::Adaptive,
            sensing: SensingMode::Perfect,
            pr_blocking: true,
            slots_per_trial: 200,
            n_trials: 500,
            master_seed: 0,
            topology: Topology::FullMesh,
            delivery_denominator: DeliveryDenominator::OthersOnly,
        }
    }
}

impl SimConfig {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_nodes < 2 {
            return Err(ConfigError::TooFewNodes {
                value: self.n_nodes,
            });
        }
        if self.channels.is_empty() {
            return Err(ConfigError::NoChannels);
        }
        for (i, ch) in self.channels.iter().enumerate() {
            ch.validate(i + 1)?;
        }
        if self.slots_per_trial == 0 {
            return Err(ConfigError::NoSlots);
        }
        if self.n_trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        self.sensing.validate()?;
        self.topology.validate(self.n_nodes)?;
        Ok(())
    }
}

/// What happened in one measured slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotOutcome {
    pub slot: usize,
    pub tx_node: NodeId,
    pub tx_channel: ChannelId,
    /// Nodes that received the broadcast, ascending.
    pub receivers: Vec<NodeId>,
}

/// Per-node packet counters accumulated over one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialResult {
    /// Packets each node transmitted.
    pub sent: Vec<u64>,
    /// Packets each node received.
    pub received: Vec<u64>,
    /// Receiver count of each of a node's own transmissions, in slot order.
    pub receiver_counts: Vec<Vec<u32>>,
}

impl TrialResult {
    fn new(n_nodes: usize) -> Self {
        TrialResult {
            sent: vec![0; n_nodes],
            received: vec![0; n_nodes],
            receiver_counts: vec![Vec::new(); n_nodes],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.sent.len()
    }

    /// Packets sent by every node combined.
    pub fn total_sent(&self) -> u64 {
        self.sent.iter().sum()
    }
}

/// Live state of one trial. Construction performs the stationary initial
/// draw and, in windowed sensing mode, a warm-up of `W` slots in which the
/// primary radios evolve and nodes listen but nothing is transmitted.
pub struct Trial<'a> {
    config: &'a SimConfig,
    transitions: Vec<ChannelTransition>,
    pr: PrState,
    estimators: Vec<OccupancyEstimator>,
    slot: usize,
    result: TrialResult,
    rng_pr: ChaCha8Rng,
    rng_select: ChaCha8Rng,
    rng_rx: ChaCha8Rng,
    scratch_estimates: Vec<f64>,
}

impl<'a> Trial<'a> {
    pub fn new(config: &'a SimConfig, trial_index: u64) -> Result<Self, ConfigError> {
        config.validate()?;
        let transitions = config
            .channels
            .iter()
            .map(|c| stationary_to_transitions(c.occupancy, c.burst_len))
            .collect::<Result<Vec<_>, _>>()?;

        let mut rng_pr = stream(config.master_seed, trial_index, StreamRole::PrActivity);
        let rng_select = stream(config.master_seed, trial_index, StreamRole::Selection);
        let rng_rx = stream(config.master_seed, trial_index, StreamRole::Reception);

        let pr = PrState::stationary(&config.channels, &mut rng_pr);
        let estimators =
            vec![OccupancyEstimator::new(config.sensing, config.n_channels()); config.n_nodes];

        let mut trial = Trial {
            config,
            transitions,
            pr,
            estimators,
            slot: 0,
            result: TrialResult::new(config.n_nodes),
            rng_pr,
            rng_select,
            rng_rx,
            scratch_estimates: Vec::with_capacity(config.n_channels()),
        };

        for _ in 0..config.sensing.warmup_slots() {
            trial.advance_and_listen();
        }
        Ok(trial)
    }

    /// Advances the primary radios one slot and records the new busy flags
    /// into every node's estimator.
    fn advance_and_listen(&mut self) {
        self.pr.advance(&self.transitions, &mut self.rng_pr);
        if matches!(self.config.sensing, SensingMode::Windowed { .. }) {
            for est in &mut self.estimators {
                for i in 0..self.config.n_channels() {
                    let ch = ChannelId::from_index(i);
                    est.observe(ch, self.pr.is_busy(ch));
                }
            }
        }
    }

    /// Channel chosen by one node. Selection reads the estimator state as it
    /// stood before this slot's observations, so nodes never peek at the
    /// busy flags of the slot they are selecting for.
    fn select(&mut self, node_index: usize) -> ChannelId {
        match self.config.strategy {
            SelectionStrategy::Adaptive => {
                self.estimators[node_index]
                    .estimates_into(&self.config.channels, &mut self.scratch_estimates);
                select_adaptive(&self.scratch_estimates)
            }
            SelectionStrategy::Random => {
                select_random(self.config.n_channels(), &mut self.rng_select)
            }
        }
    }

    /// Runs one measured slot and reports its outcome.
    ///
    /// Order within the slot: primary radios advance; the round-robin
    /// transmitter and every overhearer pick channels from their pre-slot
    /// estimates (in node-id order, so random draws are reproducible); a node
    /// receives when it picked the transmit channel, is adjacent to the
    /// transmitter, the channel is not blocked by a busy primary radio, and
    /// an independent per-channel reception draw succeeds. Finally the new
    /// busy flags are folded into the estimators for future slots.
    pub fn step(&mut self) -> SlotOutcome {
        let config = self.config;
        let n_nodes = config.n_nodes;

        self.pr.advance(&self.transitions, &mut self.rng_pr);

        let tx_index = self.slot % n_nodes;
        let tx_node = NodeId::from_index(tx_index);
        let mut tx_channel = ChannelId::new(1);
        let mut choices: Vec<ChannelId> = Vec::with_capacity(n_nodes);
        for node_index in 0..n_nodes {
            let choice = self.select(node_index);
            if node_index == tx_index {
                tx_channel = choice;
            }
            choices.push(choice);
        }

        let blocked = config.pr_blocking && self.pr.is_busy(tx_channel);
        let base_reception = config.channels[tx_channel.index()].base_reception;
        let mut receivers = Vec::new();
        for (node_index, &choice) in choices.iter().enumerate() {
            if node_index == tx_index {
                continue;
            }
            let node = NodeId::from_index(node_index);
            if choice == tx_channel
                && config.topology.adjacent(tx_node, node)
                && !blocked
                && self.rng_rx.gen_bool(base_reception)
            {
                receivers.push(node);
            }
        }

        self.result.sent[tx_index] += 1;
        for r in &receivers {
            self.result.received[r.index()] += 1;
        }
        self.result.receiver_counts[tx_index].push(receivers.len() as u32);

        if matches!(config.sensing, SensingMode::Windowed { .. }) {
            for est in &mut self.estimators {
                for i in 0..config.n_channels() {
                    let ch = ChannelId::from_index(i);
                    est.observe(ch, self.pr.is_busy(ch));
                }
            }
        }

        let outcome = SlotOutcome {
            slot: self.slot,
            tx_node,
            tx_channel,
            receivers,
        };
        self.slot += 1;
        outcome
    }

    /// Runs measured slots until the trial's slot budget is spent and
    /// returns the counters.
    pub fn run(mut self) -> TrialResult {
        while self.slot < self.config.slots_per_trial {
            self.step();
        }
        self.result
    }
}

/// Runs one trial with its deterministically derived random streams. The
/// result is a pure function of `(config, trial_index)`.
pub fn run_trial(config: &SimConfig, trial_index: u64) -> Result<TrialResult, ConfigError> {
    Ok(Trial::new(config, trial_index)?.run())
}

/// Runs all configured trials (in parallel) and summarizes them with
/// across-trial means and 95% confidence intervals. Trials are aggregated in
/// trial-index order, so the summary does not depend on scheduling.
pub fn run_experiment(config: &SimConfig) -> Result<ExperimentSummary, ConfigError> {
    config.validate()?;
    let trials: Vec<TrialResult> = (0..config.n_trials as u64)
        .into_par_iter()
        .map(|i| Trial::new(config, i).map(|t| t.run()))
        .collect::<Result<_, _>>()?;
    Ok(metrics::summarize(config, &trials))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_channels(occupancies: &[f64]) -> Vec<ChannelParams> {
        occupancies
            .iter()
            .map(|&occ| ChannelParams {
                occupancy: occ,
                burst_len: crate::channel::burst_len_floor(occ).max(4.0),
                base_reception: 1.0,
            })
            .collect()
    }

    fn base_config(occupancies: &[f64], strategy: SelectionStrategy) -> SimConfig {
        SimConfig {
            n_nodes: 6,
            channels: uniform_channels(occupancies),
            strategy,
            slots_per_trial: 120,
            n_trials: 4,
            master_seed: 77,
            ..SimConfig::default()
        }
    }

    #[test]
    fn round_robin_equalizes_sent_counts() {
        let config = base_config(&[0.2, 0.4], SelectionStrategy::Adaptive);
        let result = run_trial(&config, 0).unwrap();
        // 120 slots, 6 nodes: 20 transmissions each.
        assert_eq!(result.sent, vec![20; 6]);
        assert_eq!(result.total_sent(), 120);
    }

    #[test]
    fn trials_are_deterministic() {
        let config = base_config(&[0.2, 0.4, 0.6], SelectionStrategy::Random);
        assert_eq!(run_trial(&config, 3).unwrap(), run_trial(&config, 3).unwrap());
        assert_ne!(run_trial(&config, 3).unwrap(), run_trial(&config, 4).unwrap());
    }

    #[test]
    fn lossless_adaptive_full_mesh_reaches_everyone() {
        let mut config = base_config(&[0.3, 0.1, 0.5], SelectionStrategy::Adaptive);
        config.pr_blocking = false;
        let mut trial = Trial::new(&config, 0).unwrap();
        for slot in 0..config.slots_per_trial {
            let outcome = trial.step();
            assert_eq!(outcome.slot, slot);
            assert_eq!(outcome.tx_channel.get(), 2, "all nodes pick the best channel");
            assert_eq!(outcome.receivers.len(), config.n_nodes - 1);
            assert!(!outcome.receivers.contains(&outcome.tx_node));
        }
        assert!(trial
            .result
            .receiver_counts
            .iter()
            .flatten()
            .all(|&c| c as usize == config.n_nodes - 1));
    }

    #[test]
    fn receivers_bounded_and_conserved() {
        let config = base_config(&[0.5, 0.5, 0.5, 0.5], SelectionStrategy::Random);
        for trial_index in 0..4 {
            let result = run_trial(&config, trial_index).unwrap();
            let received: u64 = result.received.iter().sum();
            let counted: u64 = result
                .receiver_counts
                .iter()
                .flatten()
                .map(|&c| c as u64)
                .sum();
            assert_eq!(received, counted);
            assert!(result
                .receiver_counts
                .iter()
                .flatten()
                .all(|&c| (c as usize) < config.n_nodes));
        }
    }

    #[test]
    fn single_channel_strategies_coincide() {
        // With one channel, selection is forced; the per-role random streams
        // then line up and both strategies produce identical trials.
        let adaptive = base_config(&[0.4], SelectionStrategy::Adaptive);
        let random = SimConfig {
            strategy: SelectionStrategy::Random,
            ..adaptive.clone()
        };
        for trial_index in 0..5 {
            assert_eq!(
                run_trial(&adaptive, trial_index).unwrap(),
                run_trial(&random, trial_index).unwrap()
            );
        }
    }

    #[test]
    fn warmup_does_not_consume_measured_slots() {
        let mut config = base_config(&[0.2, 0.7], SelectionStrategy::Adaptive);
        config.sensing = SensingMode::Windowed { window: 30 };
        let result = run_trial(&config, 0).unwrap();
        assert_eq!(result.sent, vec![20; 6]);
    }

    #[test]
    fn windowed_estimators_fill_during_warmup() {
        let mut config = base_config(&[0.2, 0.7], SelectionStrategy::Adaptive);
        config.sensing = SensingMode::Windowed { window: 25 };
        let trial = Trial::new(&config, 0).unwrap();
        for est in &trial.estimators {
            assert_eq!(est.history_len(ChannelId::new(1)), 25);
            assert_eq!(est.history_len(ChannelId::new(2)), 25);
        }
    }

    #[test]
    fn explicit_topology_limits_receivers() {
        // Chain 1-2-3: node 3 never hears node 1.
        let adjacency = vec![
            vec![false, true, false],
            vec![true, false, true],
            vec![false, true, false],
        ];
        let mut config = base_config(&[0.0], SelectionStrategy::Adaptive);
        config.n_nodes = 3;
        config.pr_blocking = false;
        config.topology = Topology::Explicit(adjacency);
        config.slots_per_trial = 9;
        let mut trial = Trial::new(&config, 0).unwrap();
        for _ in 0..9 {
            let outcome = trial.step();
            match outcome.tx_node.get() {
                1 | 3 => assert_eq!(outcome.receivers, vec![NodeId::new(2)]),
                2 => assert_eq!(
                    outcome.receivers,
                    vec![NodeId::new(1), NodeId::new(3)]
                ),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn asymmetric_topology_rejected() {
        let adjacency = vec![
            vec![false, true, false],
            vec![false, false, true],
            vec![false, true, false],
        ];
        let mut config = base_config(&[0.1], SelectionStrategy::Adaptive);
        config.n_nodes = 3;
        config.topology = Topology::Explicit(adjacency);
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("asymmetric"));
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let mut config = base_config(&[0.2], SelectionStrategy::Adaptive);
        config.n_nodes = 1;
        assert!(matches!(
            config.validate(),
            Err(ConfigError::TooFewNodes { value: 1 })
        ));

        let mut config = base_config(&[], SelectionStrategy::Adaptive);
        config.channels.clear();
        assert!(matches!(config.validate(), Err(ConfigError::NoChannels)));

        let mut config = base_config(&[0.2], SelectionStrategy::Adaptive);
        config.sensing = SensingMode::Windowed { window: 0 };
        assert!(matches!(
            config.validate(),
            Err(ConfigError::EmptySensingWindow)
        ));
    }
}
