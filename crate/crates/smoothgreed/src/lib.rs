//! File formats, experiment pipelines and the `smoothgreed` command line
//! on top of `smoothgreed-core`.

pub mod cli;
pub mod config;
mod error;
pub mod figures;
pub mod io;
pub mod parallel;
pub mod pipeline;
pub mod sweep;

pub use error::CliError;

/// Version string written into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
