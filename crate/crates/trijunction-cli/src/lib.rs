//! File formats, caching and experiment drivers for the `trijunction`
//! command line.

pub mod assembly;
pub mod commands;
pub mod error;
pub mod geometry_io;
pub mod manifest;
pub mod rule_cache;

pub use commands::{run, Cli, Command};
pub use error::{CliError, CliResult};
