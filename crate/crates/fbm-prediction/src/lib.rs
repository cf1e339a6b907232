//! Command line front end and file formats for the fBm prediction law.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod verify;

pub use commands::{cmd_asymptotics, cmd_predict, cmd_simulate, run, Outcome};
pub use config::{Command, GridSpec, RunConfig, Settings, SweepKind};
pub use error::{CliError, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_VERIFY_FAILED};
pub use verify::cmd_verify;
