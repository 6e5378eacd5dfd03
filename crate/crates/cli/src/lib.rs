//! Batch front-end: TOML experiment configs in, JSON reports and CSV plot
//! data out.

pub mod config;
pub mod error;
pub mod plots;
pub mod presets;
pub mod report;
pub mod run;

pub use config::{Analysis, ExperimentConfig, Prepared};
pub use error::{CliError, Result};
pub use report::{ReportPayload, RunReport};
pub use run::{enforce, run, run_config, write_outputs};
