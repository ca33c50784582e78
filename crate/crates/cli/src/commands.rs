//! The `run`, `sweep`, and `oracle` commands.

use anyhow::{Context, Result};
use std::fmt::Write as _;

use crsim_core::metrics::{oracle_expected_delivery, oracle_expected_receivers};
use crsim_core::{run_experiment, CiStat};

use crate::output::{render_csv, write_outputs, ResultBlock};
use crate::spec::ExperimentSpec;

/// Executes every requested (channel count, strategy) combination in a
/// stable order: counts as configured, strategies adaptive before random.
pub fn execute(spec: &ExperimentSpec, counts: &[usize]) -> Result<Vec<ResultBlock>> {
    let mut blocks = Vec::new();
    for &n_channels in counts {
        for strategy in spec.strategy.strategies() {
            let config = spec.sim_config(n_channels, strategy)?;
            let summary = run_experiment(&config)?;
            blocks.push(ResultBlock {
                strategy,
                n_channels,
                summary,
            });
        }
    }
    Ok(blocks)
}

/// `run`: one channel count, CSV plus spec sidecar.
pub fn cmd_run(spec: &ExperimentSpec) -> Result<()> {
    let blocks = execute(spec, &[spec.channels.count()])?;
    write_outputs(spec, &render_csv(&blocks))
}

/// `sweep`: every configured channel count into one CSV keyed by
/// `n_channels`.
pub fn cmd_sweep(spec: &ExperimentSpec) -> Result<()> {
    let counts = spec
        .sweep
        .clone()
        .context("sweep: no channel counts configured (set `sweep` in the config or pass --sweep)")?;
    let blocks = execute(spec, &counts)?;
    write_outputs(spec, &render_csv(&blocks))
}

fn z_score(stat: &CiStat, expected: f64) -> f64 {
    if stat.std_err == 0.0 {
        if stat.mean == expected {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (stat.mean - expected).abs() / stat.std_err
    }
}

/// `oracle`: closed-form expectations next to simulated means, with the
/// distance between them in standard errors.
pub fn render_oracle_table(spec: &ExperimentSpec) -> Result<String> {
    let blocks = execute(spec, &[spec.channels.count()])?;
    let mut table = String::new();
    writeln!(
        table,
        "{:<10} {:<10} {:>10} {:>12} {:>12} {:>10} {:>8}",
        "strategy", "metric", "channels", "oracle", "simulated", "std_err", "z"
    )?;
    for block in &blocks {
        let config = &block.summary.config;
        let oracle_d = oracle_expected_delivery(config, block.strategy)?;
        let oracle_r = oracle_expected_receivers(config, block.strategy)?;
        let sim_d = block
            .summary
            .network_delivery
            .as_ref()
            .context("no delivery samples")?;
        let sim_r = block
            .summary
            .network_receivers
            .as_ref()
            .context("no receiver samples")?;
        for (metric, oracle, sim) in [
            ("delivery", oracle_d, sim_d),
            ("receivers", oracle_r, sim_r),
        ] {
            writeln!(
                table,
                "{:<10} {:<10} {:>10} {:>12.6} {:>12.6} {:>10.6} {:>8.2}",
                block.strategy.label(),
                metric,
                block.n_channels,
                oracle,
                sim.mean,
                sim.std_err,
                z_score(sim, oracle)
            )?;
        }
    }
    Ok(table)
}

pub fn cmd_oracle(spec: &ExperimentSpec) -> Result<()> {
    print!("{}", render_oracle_table(spec)?);
    Ok(())
}
