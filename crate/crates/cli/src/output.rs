//! CSV result emission and the resolved-spec sidecar.
//!
//! The CSV schema is fixed: one header, one row per (strategy, channel
//! count, node), floats printed with six decimals and a `.` decimal point
//! regardless of locale. Rows follow execution order, so identical specs
//! produce byte-identical files.

use anyhow::{Context, Result};
use std::path::{Path, PathBuf};

use crsim_core::{CiStat, ExperimentSummary, SelectionStrategy};

use crate::spec::ExperimentSpec;

pub const CSV_HEADER: &str = "strategy,n_channels,node_id,delivery_mean,delivery_ci_low,\
delivery_ci_high,receivers_mean,receivers_ci_low,receivers_ci_high";

/// Results of one (strategy, channel count) execution.
#[derive(Debug, Clone)]
pub struct ResultBlock {
    pub strategy: SelectionStrategy,
    pub n_channels: usize,
    pub summary: ExperimentSummary,
}

fn stat_columns(stat: Option<&CiStat>) -> (f64, f64, f64) {
    match stat {
        Some(s) => (s.mean, s.ci_low, s.ci_high),
        // A node without a single valid sample (e.g. fewer slots than
        // nodes); keeps the schema rectangular.
        None => (f64::NAN, f64::NAN, f64::NAN),
    }
}

/// Renders all blocks into one CSV document.
pub fn render_csv(blocks: &[ResultBlock]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for block in blocks {
        for node in &block.summary.per_node {
            let (dm, dl, dh) = stat_columns(node.delivery.as_ref());
            let (rm, rl, rh) = stat_columns(node.receivers.as_ref());
            out.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                block.strategy.label(),
                block.n_channels,
                node.node,
                dm,
                dl,
                dh,
                rm,
                rl,
                rh
            ));
        }
    }
    out
}

/// The sidecar lives next to the CSV: `results.csv` -> `results.spec.toml`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("spec.toml")
}

/// Serializes the resolved spec so the run can be reproduced by passing the
/// sidecar back through `--config`.
pub fn render_sidecar(spec: &ExperimentSpec) -> Result<String> {
    let body = toml::to_string_pretty(&spec.to_file()).context("cannot serialize spec echo")?;
    Ok(format!(
        "# crsim resolved experiment spec; rerun with --config <this file>\n{body}"
    ))
}

/// Writes the CSV (and sidecar) to `out`, or the CSV to stdout when no
/// output path was configured.
pub fn write_outputs(spec: &ExperimentSpec, csv: &str) -> Result<()> {
    match &spec.out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("cannot create output directory {}", parent.display()))?;
            }
            std::fs::write(path, csv)
                .with_context(|| format!("cannot write results to {}", path.display()))?;
            let sidecar = sidecar_path(path);
            std::fs::write(&sidecar, render_sidecar(spec)?)
                .with_context(|| format!("cannot write spec echo to {}", sidecar.display()))?;
            eprintln!("wrote {} and {}", path.display(), sidecar.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
