//! Configuration front end for the crsim simulator: TOML spec parsing, flag
//! overrides, experiment execution, and CSV/table emission.

pub mod commands;
pub mod output;
pub mod spec;

pub use commands::{cmd_oracle, cmd_run, cmd_sweep, execute, render_oracle_table};
pub use output::{render_csv, render_sidecar, sidecar_path, write_outputs, ResultBlock, CSV_HEADER};
pub use spec::{
    parse_sensing, BaseReceptionRule, ChannelSource, ChannelsFile, ExperimentSpec,
    ExplicitChannel, Overrides, SpecFile, StrategyChoice,
};
