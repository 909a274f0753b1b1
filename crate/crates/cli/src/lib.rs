//! Configuration, pipeline orchestration and report emission for the
//! `solenoidk` command-line tool.

pub mod config;
pub mod dot;
pub mod pipeline;

pub use config::{
    parse_config, parse_config_str, parse_matrix, parse_rows, ConfigError, Options, RunConfig,
};
pub use dot::{export_dot, render_dot, DotKind};
pub use pipeline::{run_pipeline, Report, Stage, StageStatus};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const MODEL_FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
}
