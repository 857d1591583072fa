//! Command implementations behind the `segkit` binary.
//!
//! Each subcommand is a plain function taking a resolved [`RunConfig`], so
//! the binary only parses flags and the integration tests can drive the
//! same code paths.

pub mod commands;
pub mod config;
pub mod record;
pub mod report;
mod stage;

pub use config::{Method, Overrides, RunConfig};
pub use record::{BboxFile, CaseRecord, Manifest};
