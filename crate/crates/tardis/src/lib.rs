//! File formats, parallel execution and the command-line front-end for
//! [`tardis_core`].

pub mod app;
pub mod cli;
pub mod config;
pub mod diagram;
pub mod error;
pub mod exec;
pub mod io;
pub mod output;
pub mod queries;

pub use tardis_core as core;

pub use app::{execute, RunSummary};
pub use config::RunConfig;
pub use error::{CliError, Result};
