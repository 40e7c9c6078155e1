//! File formats, reports, a thread-pool executor and the command
//! implementations behind the `planch` binary.

pub mod commands;
pub mod exec;
pub mod formats;
pub mod report;

pub use commands::{CliError, ExitCode};
