//! Batch front-end for `conrelax`: JSON run configurations, the run/study
//! pipeline and its CSV and manifest artifacts.

pub mod canonical;
pub mod config;
pub mod execute;

pub use canonical::to_canonical;
pub use config::{parse_config, ConfigError, RunConfig, ValidationError};
pub use execute::{execute, Execution, Manifest, Mode};
