//! Experiment front end for the dispersion-supported BB84 link model.
//!
//! Each subcommand turns a [`config::RunConfig`] into one or more CSV panels
//! (or a key-value report); `main.rs` only handles argument parsing and I/O.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{CommandOutput, Panel};
pub use config::{ConfigMap, RunConfig};
pub use error::CliError;
