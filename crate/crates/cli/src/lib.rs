//! Config-driven pipelines over `subeq-core`.

pub mod config;
pub mod error;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod report;

pub use config::{Analysis, SystemConfig};
pub use error::CliError;
pub use pipeline::{run_pipeline, RunReport};
