//! Simulation studies: first-candidate error rates of Trial-and-Error,
//! runtime comparison of all algorithms, and oracle cross-validation.
//!
//! Work is split into one task per simulated system. Each task owns a random
//! stream derived from the master seed and its task index, and results are
//! reduced in task order, so output does not depend on how tasks are scheduled.

mod config;
mod error_rate;
mod exec;
mod runtime;
mod table;
mod validate;

use thiserror::Error;

pub use config::{ErrorRateConfig, Grid, RuntimeConfig, Setting};
pub use error_rate::{error_rate_study, ErrorRateOutcome, ErrorRecord, Rate};
pub use exec::Execution;
pub use runtime::{runtime_study, RunRecord, RuntimeOutcome};
pub use table::{format_sig6, Axis, GroupKey, StudyRow, StudyTable, CSV_HEADER};
pub use validate::{
    cross_validate, default_validation_variants, validation_systems, FailureCase, ValidationFailure,
    ValidationReport, ValidationVariant, VariantSummary,
};

use crate::generators::GeneratorError;
use crate::solvers::SolverError;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A system whose run failed; recorded instead of aborting the study.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarantineEntry {
    pub setting: Setting,
    pub repetition: usize,
    pub task: u64,
    pub algorithm: String,
    pub message: String,
}

pub(crate) fn quarantine_generator(setting: &Setting, repetition: usize, task: u64, e: GeneratorError) -> QuarantineEntry {
    QuarantineEntry {
        setting: *setting,
        repetition,
        task,
        algorithm: "generator".to_string(),
        message: e.to_string(),
    }
}

pub(crate) fn quarantine_solver(
    setting: &Setting,
    repetition: usize,
    task: u64,
    algorithm: String,
    e: &SolverError,
) -> QuarantineEntry {
    QuarantineEntry {
        setting: *setting,
        repetition,
        task,
        algorithm,
        message: e.to_string(),
    }
}
