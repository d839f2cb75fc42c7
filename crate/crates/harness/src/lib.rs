//! Experiment harness: CMA-ES runs over the benchmark grid, trajectory and
//! global-sample features, leave-one-instance-out training of the raw/log
//! forest pair, threshold selection and table-shaped reports.

pub mod config;
pub mod cv;
mod error;
pub mod features;
pub mod io;
pub mod pipeline;
pub mod portfolio;
pub mod report;
pub mod runs;
pub mod select;

pub use config::{ExperimentConfig, Mode, TauPolicy};
pub use error::{HarnessError, Result};
pub use pipeline::run_pipeline;

/// Tags that keep the random streams of different stages apart.
pub(crate) mod streams {
    pub const RUN: u64 = 1;
    pub const GLOBAL: u64 = 2;
    pub const FOREST: u64 = 3;
    pub const RFE: u64 = 4;
}
