//! Reference solutions, property checks and the acceptance criteria for
//! the multiflow crates.
//!
//! `oracle` and `checks` are also compiled into the integration tests of
//! `multiflow-core`, so they only use `multiflow_core` and `rand`.

pub mod checks;
pub mod criteria;
pub mod oracle;
