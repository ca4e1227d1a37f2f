//! Command-line pipeline over the `toxiscope` library.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;

pub use commands::{execute, Cli};
pub use config::RunConfig;
pub use error::CliError;
