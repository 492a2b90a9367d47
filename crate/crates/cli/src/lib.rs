//! Front end for the sampled-data heat-control solvers: run configuration,
//! the solve and sweep commands, the acceptance suite and report output.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use report::{Report, Verdict};
