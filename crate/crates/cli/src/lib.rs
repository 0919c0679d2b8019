//! Command-line front end for the disparity library: config parsing, the
//! subcommands and report writers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
