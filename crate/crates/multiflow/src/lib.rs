//! Configuration files, exports, parallel builds and the command pipelines
//! behind the `multiflow` binary.

pub mod config;
pub mod export;
pub mod expr;
pub mod parallel;
pub mod run;

pub use multiflow_core as core;

pub use config::{ConfigError, SystemConfig};
pub use run::{run, Command, Outcome, Overrides, RunError};
