//! Configuration, command implementations and output formats of the
//! `omwitness` tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, CommandResult, Report};
pub use config::{Command, Format, RunConfig};
pub use error::{exit, CliError};
