//! Command-line front end: unit-aware run configurations, embedded presets
//! and report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;
pub mod quantity;

pub use config::RunConfig;
pub use error::{exit, CliError};
