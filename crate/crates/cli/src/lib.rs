//! Library side of the `qvortex` command-line tool: configuration loading
//! and the subcommands.

pub mod commands;
pub mod config;

pub use commands::{cmd_coupler, cmd_field, cmd_sit, cmd_verify, cmd_wigner, CmdError, CouplerRequest};
pub use config::RunConfig;
