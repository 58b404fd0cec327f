//! Batch driver for the friction toolkit: JSON configs in, JSON, CSV and SVG out.

pub mod commands;
pub mod config;
pub mod error;
#[doc(hidden)]
pub mod fuzz_entry;
pub mod heatmap;
pub mod io;

pub use commands::{run, Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, Result};
pub use heatmap::{emit_heatmap, Factor, Heatmap, Metric};
