//! Library side of the `weierlab` command: configuration, subcommands,
//! artifacts and the invariant suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;
