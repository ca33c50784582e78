//! Experiment specification: TOML schema, flag overrides, default
//! resolution, and deterministic channel generation.
//!
//! A run is described by a `SpecFile` (every field optional), merged with
//! command-line overrides (flags win) and filled with defaults into an
//! `ExperimentSpec`. The resolved spec is also what gets echoed next to the
//! results; feeding the echo back through `resolve` reproduces the run
//! exactly.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

use crsim_core::rng::{stream, StreamRole};
use crsim_core::{
    burst_len_floor, ChannelParams, DeliveryDenominator, SelectionStrategy, SensingMode,
    SimConfig, Topology, DEFAULT_WINDOW,
};

pub const DEFAULT_NODES: usize = 10;
pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_SLOTS: usize = 200;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_CHANNEL_COUNT: usize = 8;
pub const DEFAULT_OCCUPANCY_RANGE: [f64; 2] = [0.1, 0.9];
pub const DEFAULT_BURST_LEN: f64 = 10.0;
pub const DEFAULT_BASE_RECEPTION: f64 = 1.0;

/// Which strategies a command executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StrategyChoice {
    Adaptive,
    Random,
    Both,
}

impl StrategyChoice {
    pub fn strategies(self) -> Vec<SelectionStrategy> {
        match self {
            StrategyChoice::Adaptive => vec![SelectionStrategy::Adaptive],
            StrategyChoice::Random => vec![SelectionStrategy::Random],
            StrategyChoice::Both => {
                vec![SelectionStrategy::Adaptive, SelectionStrategy::Random]
            }
        }
    }
}

impl fmt::Display for StrategyChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StrategyChoice::Adaptive => "adaptive",
            StrategyChoice::Random => "random",
            StrategyChoice::Both => "both",
        };
        f.write_str(s)
    }
}

/// Parses the `--sensing` syntax: `perfect`, `window` (default width), or
/// `window:W`.
pub fn parse_sensing(text: &str) -> Result<SensingMode> {
    match text {
        "perfect" => Ok(SensingMode::Perfect),
        "window" => Ok(SensingMode::Windowed {
            window: DEFAULT_WINDOW,
        }),
        other => {
            if let Some(w) = other.strip_prefix("window:") {
                let window: usize = w
                    .parse()
                    .with_context(|| format!("sensing: invalid window width {w:?}"))?;
                if window == 0 {
                    bail!("sensing: window width must be at least 1");
                }
                Ok(SensingMode::Windowed { window })
            } else {
                bail!("sensing: expected \"perfect\" or \"window:W\", got {other:?}");
            }
        }
    }
}

pub fn sensing_to_string(mode: SensingMode) -> String {
    match mode {
        SensingMode::Perfect => "perfect".to_string(),
        SensingMode::Windowed { window } => format!("window:{window}"),
    }
}

/// Per-channel base reception: one fixed value or a sampling range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseReceptionRule {
    Fixed(f64),
    Sampled([f64; 2]),
}

impl BaseReceptionRule {
    fn validate(&self) -> Result<()> {
        match *self {
            BaseReceptionRule::Fixed(q) => {
                if !q.is_finite() || !(0.0..=1.0).contains(&q) {
                    bail!("channels.base_reception: must lie in [0, 1], got {q}");
                }
            }
            BaseReceptionRule::Sampled([lo, hi]) => {
                if !lo.is_finite() || !hi.is_finite() || lo > hi || lo < 0.0 || hi > 1.0 {
                    bail!(
                        "channels.base_reception: range must satisfy 0 <= lo <= hi <= 1, \
                         got [{lo}, {hi}]"
                    );
                }
            }
        }
        Ok(())
    }
}

/// One explicitly listed channel in the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitChannel {
    pub occupancy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burst_len: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_reception: Option<f64>,
}

/// The `[channels]` section of the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupancy_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_reception: Option<BaseReceptionRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burst_len: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Vec<ExplicitChannel>>,
}

/// On-disk experiment configuration. Every field is optional; defaults are
/// applied during resolution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pr_blocking: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delivery_denominator: Option<DeliveryDenominator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Neighbor lists (1-based node ids); links are undirected. Omitted
    /// means full mesh.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channels: Option<ChannelsFile>,
}

impl SpecFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }
}

/// Command-line overrides; any set field wins over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub channels: Option<usize>,
    pub nodes: Option<usize>,
    pub trials: Option<usize>,
    pub slots: Option<usize>,
    pub strategy: Option<StrategyChoice>,
    pub sensing: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub sweep: Option<Vec<usize>>,
}

/// How the channel set is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    Explicit(Vec<ChannelParams>),
    Sampled {
        count: usize,
        occupancy_range: [f64; 2],
        base_reception: BaseReceptionRule,
        burst_len: f64,
    },
}

impl ChannelSource {
    /// Channel count of a non-sweep run.
    pub fn count(&self) -> usize {
        match self {
            ChannelSource::Explicit(list) => list.len(),
            ChannelSource::Sampled { count, .. } => *count,
        }
    }
}

/// Fully resolved experiment specification.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub nodes: usize,
    pub trials: usize,
    pub slots: usize,
    pub seed: u64,
    pub strategy: StrategyChoice,
    pub sensing: SensingMode,
    pub pr_blocking: bool,
    pub delivery_denominator: DeliveryDenominator,
    pub sweep: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    pub adjacency: Option<Vec<Vec<usize>>>,
    pub channels: ChannelSource,
}

impl ExperimentSpec {
    /// Merges file and flags, applies defaults, and validates everything.
    pub fn resolve(file: SpecFile, flags: &Overrides) -> Result<Self> {
        let nodes = flags.nodes.or(file.nodes).unwrap_or(DEFAULT_NODES);
        if nodes < 2 {
            bail!("nodes: at least 2 are required, got {nodes}");
        }
        let trials = flags.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            bail!("trials: must be at least 1");
        }
        let slots = flags.slots.or(file.slots).unwrap_or(DEFAULT_SLOTS);
        if slots == 0 {
            bail!("slots: must be at least 1");
        }
        let seed = flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
        let strategy = flags
            .strategy
            .or(file.strategy)
            .unwrap_or(StrategyChoice::Both);
        let sensing = match flags.sensing.as_deref().or(file.sensing.as_deref()) {
            Some(text) => parse_sensing(text)?,
            None => SensingMode::Perfect,
        };
        let pr_blocking = file.pr_blocking.unwrap_or(true);
        let delivery_denominator = file.delivery_denominator.unwrap_or_default();

        let sweep = flags.sweep.clone().or(file.sweep);
        if let Some(counts) = &sweep {
            if counts.is_empty() {
                bail!("sweep: at least one channel count is required");
            }
            if counts.iter().any(|&c| c == 0) {
                bail!("sweep: channel counts must be at least 1");
            }
        }

        let out = flags.out.clone().or(file.out);

        let adjacency = file.adjacency;
        if let Some(lists) = &adjacency {
            if lists.len() != nodes {
                bail!(
                    "adjacency: expected one neighbor list per node ({nodes}), got {}",
                    lists.len()
                );
            }
            for (i, neighbors) in lists.iter().enumerate() {
                for &n in neighbors {
                    if n < 1 || n > nodes {
                        bail!(
                            "adjacency: node {} lists neighbor {n}, outside 1..={nodes}",
                            i + 1
                        );
                    }
                    if n == i + 1 {
                        bail!("adjacency: node {n} lists itself as a neighbor");
                    }
                }
            }
        }

        let channels = Self::resolve_channels(file.channels.unwrap_or_default(), flags)?;
        if let (Some(counts), ChannelSource::Explicit(list)) = (&sweep, &channels) {
            if let Some(&too_big) = counts.iter().find(|&&c| c > list.len()) {
                bail!(
                    "sweep: count {too_big} exceeds the {} explicitly listed channels",
                    list.len()
                );
            }
        }

        Ok(ExperimentSpec {
            nodes,
            trials,
            slots,
            seed,
            strategy,
            sensing,
            pr_blocking,
            delivery_denominator,
            sweep,
            out,
            adjacency,
            channels,
        })
    }

    fn resolve_channels(section: ChannelsFile, flags: &Overrides) -> Result<ChannelSource> {
        if let Some(explicit) = section.explicit {
            if section.occupancy_range.is_some() {
                bail!("channels.occupancy_range: cannot be combined with an explicit list");
            }
            if explicit.is_empty() {
                bail!("channels.explicit: at least one channel is required");
            }
            if let Some(count) = section.count {
                if count != explicit.len() {
                    bail!(
                        "channels.count: {count} conflicts with the {} explicitly listed channels",
                        explicit.len()
                    );
                }
            }
            let default_burst = section.burst_len.unwrap_or(DEFAULT_BURST_LEN);
            let default_base = match section.base_reception {
                None => DEFAULT_BASE_RECEPTION,
                Some(BaseReceptionRule::Fixed(q)) => q,
                Some(BaseReceptionRule::Sampled(_)) => {
                    bail!("channels.base_reception: a range cannot be combined with an explicit list")
                }
            };
            let mut list = Vec::with_capacity(explicit.len());
            for (i, ch) in explicit.iter().enumerate() {
                let params = ChannelParams {
                    occupancy: ch.occupancy,
                    burst_len: ch.burst_len.unwrap_or(default_burst),
                    base_reception: ch.base_reception.unwrap_or(default_base),
                };
                params
                    .validate(i + 1)
                    .with_context(|| "channels.explicit".to_string())?;
                list.push(params);
            }
            if let Some(count) = flags.channels {
                if count > list.len() {
                    bail!(
                        "channels: requested {count} channels but only {} are listed",
                        list.len()
                    );
                }
                list.truncate(count);
            }
            return Ok(ChannelSource::Explicit(list));
        }

        let count = flags
            .channels
            .or(section.count)
            .unwrap_or(DEFAULT_CHANNEL_COUNT);
        if count == 0 {
            bail!("channels.count: must be at least 1");
        }
        let occupancy_range = section.occupancy_range.unwrap_or(DEFAULT_OCCUPANCY_RANGE);
        let [lo, hi] = occupancy_range;
        if !lo.is_finite() || !hi.is_finite() || lo > hi || lo < 0.0 || hi >= 1.0 {
            bail!("channels.occupancy_range: must satisfy 0 <= lo <= hi < 1, got [{lo}, {hi}]");
        }
        let base_reception = section
            .base_reception
            .unwrap_or(BaseReceptionRule::Fixed(DEFAULT_BASE_RECEPTION));
        base_reception.validate()?;
        let burst_len = section.burst_len.unwrap_or(DEFAULT_BURST_LEN);
        let floor = burst_len_floor(hi);
        if !burst_len.is_finite() || burst_len < floor {
            bail!(
                "channels.burst_len: must be at least {floor:.4} so every occupancy up to \
                 {hi} stays feasible, got {burst_len}"
            );
        }
        Ok(ChannelSource::Sampled {
            count,
            occupancy_range,
            base_reception,
            burst_len,
        })
    }

    /// Materializes the first `n` channels of the source.
    ///
    /// Sampled channels are drawn from a dedicated stream derived from the
    /// master seed, one (occupancy, base reception) pair per channel in id
    /// order, so the set for a smaller count is always a prefix of the set
    /// for a larger one - sweeps append channels without disturbing the
    /// existing ones.
    pub fn build_channels(&self, n: usize) -> Result<Vec<ChannelParams>> {
        match &self.channels {
            ChannelSource::Explicit(list) => {
                if n > list.len() {
                    bail!(
                        "channels: requested {n} channels but only {} are listed",
                        list.len()
                    );
                }
                Ok(list[..n].to_vec())
            }
            ChannelSource::Sampled {
                occupancy_range: [lo, hi],
                base_reception,
                burst_len,
                ..
            } => {
                let mut rng = stream(self.seed, 0, StreamRole::ChannelSampling);
                Ok((0..n)
                    .map(|_| {
                        let occupancy = if lo == hi {
                            *lo
                        } else {
                            rng.gen_range(*lo..*hi)
                        };
                        let base = match *base_reception {
                            BaseReceptionRule::Fixed(q) => q,
                            BaseReceptionRule::Sampled([qlo, qhi]) => {
                                if qlo == qhi {
                                    qlo
                                } else {
                                    rng.gen_range(qlo..qhi)
                                }
                            }
                        };
                        ChannelParams {
                            occupancy,
                            burst_len: *burst_len,
                            base_reception: base,
                        }
                    })
                    .collect())
            }
        }
    }

    /// Channel counts this spec's sweep covers (a single count without one).
    pub fn channel_counts(&self) -> Vec<usize> {
        match &self.sweep {
            Some(counts) => counts.clone(),
            None => vec![self.channels.count()],
        }
    }

    fn topology(&self) -> Topology {
        match &self.adjacency {
            None => Topology::FullMesh,
            Some(lists) => {
                let n = self.nodes;
                let mut matrix = vec![vec![false; n]; n];
                for (i, neighbors) in lists.iter().enumerate() {
                    for &j in neighbors {
                        // Links are undirected: listing either endpoint connects both.
                        matrix[i][j - 1] = true;
                        matrix[j - 1][i] = true;
                    }
                }
                Topology::Explicit(matrix)
            }
        }
    }

    /// Builds the engine configuration for one (channel count, strategy)
    /// combination.
    pub fn sim_config(&self, n_channels: usize, strategy: SelectionStrategy) -> Result<SimConfig> {
        let config = SimConfig {
            n_nodes: self.nodes,
            channels: self.build_channels(n_channels)?,
            strategy,
            sensing: self.sensing,
            pr_blocking: self.pr_blocking,
            slots_per_trial: self.slots,
            n_trials: self.trials,
            master_seed: self.seed,
            topology: self.topology(),
            delivery_denominator: self.delivery_denominator,
        };
        config.validate()?;
        Ok(config)
    }

    /// Full echo of the resolved spec; `resolve(to_file(spec), no flags)`
    /// yields the spec back.
    pub fn to_file(&self) -> SpecFile {
        let channels = match &self.channels {
            ChannelSource::Explicit(list) => ChannelsFile {
                count: Some(list.len()),
                explicit: Some(
                    list.iter()
                        .map(|ch| ExplicitChannel {
                            occupancy: ch.occupancy,
                            burst_len: Some(ch.burst_len),
                            base_reception: Some(ch.base_reception),
                        })
                        .collect(),
                ),
                ..ChannelsFile::default()
            },
            ChannelSource::Sampled {
                count,
                occupancy_range,
                base_reception,
                burst_len,
            } => ChannelsFile {
                count: Some(*count),
                occupancy_range: Some(*occupancy_range),
                base_reception: Some(*base_reception),
                burst_len: Some(*burst_len),
                explicit: None,
            },
        };
        SpecFile {
            nodes: Some(self.nodes),
            trials: Some(self.trials),
            slots: Some(self.slots),
            seed: Some(self.seed),
            strategy: Some(self.strategy),
            sensing: Some(sensing_to_string(self.sensing)),
            pr_blocking: Some(self.pr_blocking),
            delivery_denominator: Some(self.delivery_denominator),
            sweep: self.sweep.clone(),
            out: self.out.clone(),
            adjacency: self.adjacency.clone(),
            channels: Some(channels),
        }
    }
}
