//! Std companion of `vtol-core`: TOML configuration, CSV logs and the `vtol`
//! command-line harness.

pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;

pub use error::{Error, Result, EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};
