//! Experiment driver for `trunclap-core`: configuration files, CSV artifacts
//! and pass/fail reports for each numerical experiment.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod experiments;
pub mod output;
pub mod report;

pub use config::{Config, ConfigError};
pub use experiments::{Command, Context, ExperimentError};
pub use report::{Check, ExperimentReport, Source};
