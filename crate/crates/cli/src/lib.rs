//! Command-line orchestration for `viscodiff-core`: experiment files,
//! single runs, parameter sweeps and hysteresis experiments, written out as
//! CSV and SVG.

pub mod commands;
pub mod config_file;
pub mod error;
pub mod output;
pub mod svg;

pub use commands::{cmd_hysteresis, cmd_simulate, cmd_sweep, load_config, SweepParam};
pub use config_file::{parse_config, serialize_config, ExperimentConfig};
pub use error::{CliError, ConfigError};
