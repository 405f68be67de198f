//! Configuration, file formats, and the command-line subcommands.

pub mod commands;
pub mod config;
pub mod files;
pub mod verify;

pub use commands::{cmd_field, cmd_fit, cmd_simulate, cmd_spectrum, cmd_verify, FitReport, SimulateSummary};
pub use config::{load_config, parse_config, DealiasSetting, FieldGrid, InitialCondition, RunConfig};
pub use verify::{Level, VerifyReport};
