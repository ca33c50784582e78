//! Cross-checks of the simulation engine against independent closed forms
//! and its own declared invariants.

use crsim_core::metrics::{oracle_expected_delivery, oracle_expected_receivers};
use crsim_core::rng::{stream, StreamRole};
use crsim_core::{
    burst_len_floor, run_experiment, run_trial, ChannelParams, SelectionStrategy, SimConfig,
};
use rand::Rng;

fn channels_with(occupancies: &[f64], base_reception: f64) -> Vec<ChannelParams> {
    occupancies
        .iter()
        .map(|&occ| ChannelParams {
            occupancy: occ,
            burst_len: burst_len_floor(occ).max(5.0),
            base_reception,
        })
        .collect()
}

fn sampled_occupancies(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, 0, StreamRole::ChannelSampling);
    (0..n).map(|_| rng.gen_range(0.1..0.9)).collect()
}

/// |simulated - expected| measured in across-trial standard errors.
fn z_score(mean: f64, std_err: f64, expected: f64) -> f64 {
    if std_err == 0.0 {
        if mean == expected {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (mean - expected).abs() / std_err
    }
}

#[test]
fn random_reception_rate_matches_channel_match_probability() {
    // Without blocking and with perfect reception, the random baseline's
    // per-link rate is exactly the probability two uniform draws agree: 1/N.
    for n in [2usize, 5] {
        let config = SimConfig {
            n_nodes: 8,
            channels: channels_with(&vec![0.5; n], 1.0),
            strategy: SelectionStrategy::Random,
            pr_blocking: false,
            slots_per_trial: 160,
            n_trials: 300,
            master_seed: 11,
            ..SimConfig::default()
        };
        let summary = run_experiment(&config).unwrap();
        let d = summary.network_delivery.unwrap();
        let z = z_score(d.mean, d.std_err, 1.0 / n as f64);
        assert!(z <= 3.0, "N={n}: delivery {} vs 1/{n}, z={z}", d.mean);
    }
}

#[test]
fn adaptive_reception_rate_matches_best_channel_idle_probability() {
    // With blocking and perfect reception, every node sits on the
    // lowest-occupancy channel, so the long-run rate is its idle fraction.
    let config = SimConfig {
        n_nodes: 8,
        channels: channels_with(&[0.55, 0.25, 0.7, 0.4], 1.0),
        strategy: SelectionStrategy::Adaptive,
        slots_per_trial: 160,
        n_trials: 300,
        master_seed: 12,
        ..SimConfig::default()
    };
    let summary = run_experiment(&config).unwrap();
    let d = summary.network_delivery.unwrap();
    let z = z_score(d.mean, d.std_err, 0.75);
    assert!(z <= 3.0, "delivery {} vs 0.75, z={z}", d.mean);
}

#[test]
fn simulation_tracks_oracles_across_channel_grid() {
    for (i, &n) in [1usize, 2, 4, 8].iter().enumerate() {
        let occupancies = sampled_occupancies(n, 40 + i as u64);
        for strategy in [SelectionStrategy::Adaptive, SelectionStrategy::Random] {
            let config = SimConfig {
                n_nodes: 10,
                channels: channels_with(&occupancies, 1.0),
                strategy,
                slots_per_trial: 100,
                n_trials: 200,
                master_seed: 21 + n as u64,
                ..SimConfig::default()
            };
            let summary = run_experiment(&config).unwrap();
            let d = summary.network_delivery.unwrap();
            let r = summary.network_receivers.unwrap();
            let expected_d = oracle_expected_delivery(&config, strategy).unwrap();
            let expected_r = oracle_expected_receivers(&config, strategy).unwrap();
            let zd = z_score(d.mean, d.std_err, expected_d);
            let zr = z_score(r.mean, r.std_err, expected_r);
            assert!(
                zd <= 3.0,
                "N={n} {}: delivery {} vs oracle {expected_d}, z={zd}",
                strategy.label(),
                d.mean
            );
            assert!(
                zr <= 3.0,
                "N={n} {}: receivers {} vs oracle {expected_r}, z={zr}",
                strategy.label(),
                r.mean
            );
        }
    }
}

#[test]
fn adaptive_dominates_random() {
    // Within each config the channels share one base reception probability,
    // so the best-occupancy channel is also the best-rate channel.
    for seed in 0..6u64 {
        let mut rng = stream(seed, 1, StreamRole::ChannelSampling);
        let n = rng.gen_range(1..=10);
        let occupancies: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.95)).collect();
        let base: f64 = rng.gen_range(0.5..1.0);
        let config = SimConfig {
            n_nodes: 6,
            channels: channels_with(&occupancies, base),
            slots_per_trial: 120,
            n_trials: 120,
            master_seed: 100 + seed,
            ..SimConfig::default()
        };
        let adaptive = oracle_expected_delivery(&config, SelectionStrategy::Adaptive).unwrap();
        let random = oracle_expected_delivery(&config, SelectionStrategy::Random).unwrap();
        assert!(
            adaptive >= random,
            "seed {seed}: adaptive {adaptive} < random {random}"
        );

        let run = |strategy| {
            let config = SimConfig {
                strategy,
                ..config.clone()
            };
            run_experiment(&config).unwrap().network_delivery.unwrap()
        };
        let a = run(SelectionStrategy::Adaptive);
        let r = run(SelectionStrategy::Random);
        // Simulated ordering holds within the width of the two intervals.
        assert!(
            a.ci_high >= r.ci_low,
            "seed {seed}: adaptive CI entirely below random CI"
        );
    }
}

#[test]
fn experiment_summary_is_deterministic_under_parallelism() {
    let config = SimConfig {
        n_nodes: 10,
        channels: channels_with(&sampled_occupancies(8, 3), 1.0),
        strategy: SelectionStrategy::Random,
        slots_per_trial: 100,
        n_trials: 120,
        master_seed: 99,
        ..SimConfig::default()
    };
    let a = run_experiment(&config).unwrap();
    let b = run_experiment(&config).unwrap();
    assert_eq!(a, b);
}

#[test]
fn trial_results_conserve_receptions() {
    let config = SimConfig {
        n_nodes: 7,
        channels: channels_with(&[0.3, 0.6, 0.1], 0.8),
        strategy: SelectionStrategy::Random,
        slots_per_trial: 140,
        n_trials: 1,
        master_seed: 5,
        ..SimConfig::default()
    };
    for trial_index in 0..10 {
        let t = run_trial(&config, trial_index).unwrap();
        let received: u64 = t.received.iter().sum();
        let counted: u64 = t.receiver_counts.iter().flatten().map(|&c| c as u64).sum();
        assert_eq!(received, counted);
    }
}

#[test]
fn ci_half_width_shrinks_with_sqrt_trials() {
    // Doubling the trial count should shrink the mean CI half-width by about
    // 1/sqrt(2); averaged over 50 meta-runs the ratio lands within 20%.
    let base = SimConfig {
        n_nodes: 4,
        channels: channels_with(&[0.3, 0.6], 1.0),
        strategy: SelectionStrategy::Random,
        slots_per_trial: 40,
        ..SimConfig::default()
    };
    let half_width = |n_trials: usize, seed: u64| {
        let config = SimConfig {
            n_trials,
            master_seed: seed,
            ..base.clone()
        };
        let d = run_experiment(&config).unwrap().network_delivery.unwrap();
        (d.ci_high - d.ci_low) / 2.0
    };
    let mut ratios = Vec::new();
    for seed in 0..50u64 {
        ratios.push(half_width(80, 1_000 + seed) / half_width(40, 2_000 + seed));
    }
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let expected = 1.0 / 2.0_f64.sqrt();
    assert!(
        (mean_ratio - expected).abs() / expected < 0.20,
        "mean half-width ratio {mean_ratio} vs {expected}"
    );
}

#[test]
fn single_trial_summary_is_degenerate() {
    let config = SimConfig {
        n_nodes: 4,
        channels: channels_with(&[0.2], 1.0),
        n_trials: 1,
        slots_per_trial: 40,
        master_seed: 8,
        ..SimConfig::default()
    };
    let summary = run_experiment(&config).unwrap();
    let d = summary.network_delivery.unwrap();
    assert!(d.degenerate);
    assert_eq!(d.ci_low, d.mean);
    assert_eq!(d.ci_high, d.mean);
}
