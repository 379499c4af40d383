//! Library side of the `opoly` command-line tool: config parsing, the
//! subcommands, and report rendering.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{run, Command, Outcome, Table};
pub use config::{Job, JobConfig};
pub use error::CliError;
pub use report::{render, Format, RunReport};
