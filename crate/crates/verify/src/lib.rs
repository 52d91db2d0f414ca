//! Verification experiments for the MHD solver: manufactured solutions, energy laws,
//! continuous dependence, absorbing sets and the supporting functional inequalities.

pub mod error;
pub mod experiments;
pub mod mms;
pub mod report;
pub mod scenarios;

pub use error::{Result, VerifyError};
pub use experiments::{calibrate, run_experiment, ExperimentParams, EXPERIMENT_IDS};
pub use report::{Assertion, ExperimentReport, Sense, Table};
