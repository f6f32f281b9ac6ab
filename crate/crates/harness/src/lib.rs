//! Experiment pipelines behind the `msar-mc` command-line tool: series
//! ingestion, study configuration, the size/power study, the empirical
//! application, regeneration of the p-value coefficients and CSV output.

pub mod config;
pub mod data;
pub mod empirical;
pub mod error;
pub mod fit_table;
pub mod output;
pub mod study;

pub use error::{HarnessError, Result};
