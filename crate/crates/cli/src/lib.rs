//! File formats and commands behind the `twdp` binary.

pub mod args;
pub mod commands;
pub mod documents;
pub mod error;
pub mod formats;

pub use args::Cli;
pub use commands::run;
pub use error::{CliError, CliResult};
