//! Shared configuration builders for the crsim benchmarks.

use crsim_core::{burst_len_floor, ChannelParams, SelectionStrategy, SimConfig};

/// A paper-sized configuration: 10 nodes, evenly spread occupancies,
/// blocking on, perfect sensing.
pub fn bench_config(n_channels: usize, strategy: SelectionStrategy, n_trials: usize) -> SimConfig {
    let channels = (0..n_channels)
        .map(|i| {
            let occupancy = 0.1 + 0.8 * i as f64 / n_channels.max(2) as f64;
            ChannelParams {
                occupancy,
                burst_len: burst_len_floor(occupancy).max(10.0),
                base_reception: 1.0,
            }
        })
        .collect();
    SimConfig {
        n_nodes: 10,
        channels,
        strategy,
        slots_per_trial: 200,
        n_trials,
        master_seed: 42,
        ..SimConfig::default()
    }
}
