//! IO, configuration, parameter sweeps, and the verification suite around
//! the `spdc3-core` simulator.

pub mod config;
pub mod error;
pub mod output;
pub mod reference;
pub mod sweep;
pub mod verify;

pub use config::RunConfig;
pub use error::CliError;
