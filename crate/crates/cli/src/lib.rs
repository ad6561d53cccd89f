//! Scenario runner for the `bochner` calculus: JSON configurations in,
//! verdict tables out.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{emit, parse, ConfigError, Format, ScenarioConfig};
pub use runner::{run, Report, RunOptions, Status};
