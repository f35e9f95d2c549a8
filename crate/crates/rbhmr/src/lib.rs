//! Command line driver and file formats for `rbhmr-core`.
//!
//! [`run::run_case`] runs one of the built-in test problems end to end and
//! [`run::write_case`] stores the results as CSV files.

pub mod config;
pub mod csv;
pub mod exec;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use exec::Threads;
pub use run::{run_case, run_detect, CaseRun, DataId, RunError};
