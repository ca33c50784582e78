//! Per-node estimation of channel occupancy from busy/idle observations.
//!
//! Nodes listen on every channel every slot. In windowed mode each channel
//! keeps a sliding window of the last `W` busy/idle flags and the occupancy
//! estimate is the busy fraction of that window. Perfect mode bypasses the
//! history and reports the ground-truth occupancy, which lets tests isolate
//! strategy behaviour from estimator noise.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::channel::{ChannelId, ChannelParams};
use crate::error::ConfigError;

/// Estimate reported for a channel that has not been observed yet.
pub const EMPTY_HISTORY_PRIOR: f64 = 0.5;

/// Default sliding-window length in slots.
pub const DEFAULT_WINDOW: usize = 50;

/// How occupancy estimates are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensingMode {
    /// Estimates equal ground-truth occupancy.
    Perfect,
    /// Busy fraction of the last `window` observations per channel.
    Windowed { window: usize },
}

impl SensingMode {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            SensingMode::Perfect => Ok(()),
            SensingMode::Windowed { window: 0 } => Err(ConfigError::EmptySensingWindow),
            SensingMode::Windowed { .. } => Ok(()),
        }
    }

    /// Slots needed to fill the window before measurements start.
    pub fn warmup_slots(&self) -> usize {
        match self {
            SensingMode::Perfect => 0,
            SensingMode::Windowed { window } => *window,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct ChannelHistory {
    ring: VecDeque<bool>,
    busy_count: usize,
}

impl ChannelHistory {
    fn push(&mut self, busy: bool, window: usize) {
        if self.ring.len() == window {
            if let Some(oldest) = self.ring.pop_front() {
                if oldest {
                    self.busy_count -= 1;
                }
            }
        }
        self.ring.push_back(busy);
        if busy {
            self.busy_count += 1;
        }
    }

    fn estimate(&self) -> f64 {
        if self.ring.is_empty() {
            EMPTY_HISTORY_PRIOR
        } else {
            self.busy_count as f64 / self.ring.len() as f64
        }
    }
}

/// One node's view of per-channel occupancy.
#[derive(Debug, Clone)]
pub struct OccupancyEstimator {
    mode: SensingMode,
    n_channels: usize,
    histories: Vec<ChannelHistory>,
}

impl OccupancyEstimator {
    pub fn new(mode: SensingMode, n_channels: usize) -> Self {
        let histories = match mode {
            SensingMode::Perfect => Vec::new(),
            SensingMode::Windowed { .. } => vec![ChannelHistory::default(); n_channels],
        };
        OccupancyEstimator {
            mode,
            n_channels,
            histories,
        }
    }

    pub fn mode(&self) -> SensingMode {
        self.mode
    }

    fn check_channel(&self, channel: ChannelId) {
        assert!(
            channel.get() <= self.n_channels,
            "unknown channel id {channel} (configured channels: {})",
            self.n_channels
        );
    }

    /// Records one busy/idle observation; the oldest observation beyond the
    /// window is evicted. No-op in perfect mode.
    pub fn observe(&mut self, channel: ChannelId, busy: bool) {
        self.check_channel(channel);
        if let SensingMode::Windowed { window } = self.mode {
            self.histories[channel.index()].push(busy, window);
        }
    }

    /// Current occupancy estimate for one channel.
    pub fn estimate(&self, channel: ChannelId, truth: &ChannelParams) -> f64 {
        self.check_channel(channel);
        match self.mode {
            SensingMode::Perfect => truth.occupancy,
            SensingMode::Windowed { .. } => self.histories[channel.index()].estimate(),
        }
    }

    /// Fills `out` with the estimate of every channel, in id order.
    pub fn estimates_into(&self, channels: &[ChannelParams], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            channels
                .iter()
                .enumerate()
                .map(|(i, truth)| self.estimate(ChannelId::from_index(i), truth)),
        );
    }

    /// Number of stored observations for a channel (always 0 in perfect mode).
    pub fn history_len(&self, channel: ChannelId) -> usize {
        self.histories
            .get(channel.index())
            .map_or(0, |h| h.ring.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::stationary_to_transitions;
    use crate::channel::PrState;
    use crate::rng::{stream, StreamRole};
    use rand::Rng;

    fn truth(occupancy: f64) -> ChannelParams {
        ChannelParams {
            occupancy,
            burst_len: 1_000.0,
            base_reception: 1.0,
        }
    }

    fn ring_of(est: &OccupancyEstimator, ch: ChannelId) -> Vec<bool> {
        est.histories[ch.index()].ring.iter().copied().collect()
    }

    #[test]
    fn observe_appends_and_evicts_oldest() {
        let ch = ChannelId::new(1);
        let mut est = OccupancyEstimator::new(SensingMode::Windowed { window: 4 }, 1);

        est.observe(ch, true);
        assert_eq!(ring_of(&est, ch), vec![true]);

        // Fill to [busy, idle, busy, busy], then push idle: oldest drops off.
        for &b in &[false, true, true] {
            est.observe(ch, b);
        }
        est.observe(ch, false);
        assert_eq!(ring_of(&est, ch), vec![false, true, true, false]);
        assert_eq!(est.history_len(ch), 4);
    }

    #[test]
    fn windowed_estimate_is_busy_fraction() {
        let ch = ChannelId::new(1);
        let mut est = OccupancyEstimator::new(SensingMode::Windowed { window: 4 }, 1);
        for &b in &[true, false, true, true] {
            est.observe(ch, b);
        }
        assert_eq!(est.estimate(ch, &truth(0.0)), 0.75);
    }

    #[test]
    fn empty_history_reports_prior() {
        let est = OccupancyEstimator::new(SensingMode::Windowed { window: 4 }, 2);
        assert_eq!(est.estimate(ChannelId::new(2), &truth(0.9)), 0.5);
    }

    #[test]
    fn perfect_mode_ignores_observations() {
        let ch = ChannelId::new(1);
        let mut est = OccupancyEstimator::new(SensingMode::Perfect, 1);
        for _ in 0..10 {
            est.observe(ch, true);
        }
        assert_eq!(est.estimate(ch, &truth(0.3)), 0.3);
        assert_eq!(est.history_len(ch), 0);
    }

    #[test]
    #[should_panic(expected = "unknown channel id")]
    fn unknown_channel_rejected() {
        let mut est = OccupancyEstimator::new(SensingMode::Windowed { window: 4 }, 2);
        est.observe(ChannelId::new(3), true);
    }

    #[test]
    fn estimates_stay_in_unit_interval() {
        let mut rng = stream(5, 0, StreamRole::PrActivity);
        let mut est = OccupancyEstimator::new(SensingMode::Windowed { window: 7 }, 3);
        for _ in 0..200 {
            for id in 1..=3 {
                let ch = ChannelId::new(id);
                est.observe(ch, rng.gen_bool(0.5));
                let e = est.estimate(ch, &truth(0.5));
                assert!((0.0..=1.0).contains(&e));
            }
        }
    }

    #[test]
    fn windowed_estimate_converges_on_static_channel() {
        // Observations drawn from the occupancy chain at burst_len =
        // 1/(1-p), which makes slots independent, so the binomial 3-sigma
        // bound applies to the window mean.
        let window = 1_000;
        for &p in &[0.1, 0.5, 0.9] {
            let burst = 1.0 / (1.0 - p);
            let params = [ChannelParams {
                occupancy: p,
                burst_len: burst,
                base_reception: 1.0,
            }];
            let transitions = [stationary_to_transitions(p, burst).unwrap()];
            let bound = 3.0 * (p * (1.0 - p) / window as f64).sqrt();
            let mut hits = 0;
            for seed in 0..100u64 {
                let mut rng = stream(seed, 0, StreamRole::PrActivity);
                let mut state = PrState::stationary(&params, &mut rng);
                let mut est =
                    OccupancyEstimator::new(SensingMode::Windowed { window }, 1);
                for _ in 0..window {
                    state.advance(&transitions, &mut rng);
                    est.observe(ChannelId::new(1), state.is_busy(ChannelId::new(1)));
                }
                let p_hat = est.estimate(ChannelId::new(1), &params[0]);
                if (p_hat - p).abs() <= bound {
                    hits += 1;
                }
            }
            assert!(hits >= 99, "p={p}: only {hits}/100 runs inside 3-sigma");
        }
    }
}
