//! Library side of the `implog` command-line tool.

pub mod commands;
pub mod config;

pub use commands::Format;
pub use config::ScenarioConfig;
