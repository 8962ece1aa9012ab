//! File formats, protocol encoding, reports and subcommands of the
//! `hashcol` binary.

pub mod args;
mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod protocol;
pub mod report;

pub use commands::{run, settings, Outcome};
