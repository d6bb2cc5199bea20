//! File formats and subcommands behind the `emmp` binary.

pub mod commands;
pub mod formats;
