//! File formats, run configuration and command implementations for the
//! `dagprobit` command-line tool.
//!
//! The statistical machinery lives in [`dagprobit_core`]; this crate reads
//! and writes the CSV, JSON and JSONL artifacts and drives whole runs.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use error::{CliError, Result};
