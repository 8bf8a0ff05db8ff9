//! Experiment flows: single train/test runs, the alternating protocol,
//! grid search, leave-one-person-out cross-validation, bootstrap
//! ensembles and the simulation study.
//!
//! Work that fans out (grid rows, folds, ensemble workers) goes through an
//! [`Executor`]; results are always merged by item index.

mod config;
mod dataset;
mod ensemble;
mod exec;
mod lopo;
mod run;
mod split;
mod study;
mod tuning;

use alloc::boxed::Box;
use alloc::string::String;

pub use config::{ExperimentConfig, GridPoint, ParamGrid};
pub use dataset::{Dataset, DatasetError};
pub use ensemble::{
    bootstrap_ensemble, bootstrap_ensemble_with_seeds, majority_vote, merge_workers, EnsembleConfig, EnsembleResult,
    WorkerOutput,
};
pub use exec::{Executor, Sequential};
pub use lopo::{lopo_cv, lopo_folds, LopoFold, LopoResult};
pub use run::{alternating_protocol, evaluate_model, fit_model, run_single, AlternatingResult, Evaluation, RunOutput};
pub use split::{bootstrap_indices, stratified_split, subject_groups, SplitPlan};
pub use study::{simulation_study, StudyConfig, StudyMethod, StudyResult, StudyRow, COST_GRID, DELTA_GRID};
pub use tuning::{grid_search, rank_rows, top_k, TuningRow};

use crate::classify::ClassifyError;
use crate::dimred::DimRedError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    DimRed(#[from] DimRedError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("grid axis {axis} is empty")]
    EmptyGrid { axis: &'static str },
    #[error("no grid combination succeeded")]
    NoSuccessfulGridRow,
    #[error("training set has a single class")]
    SingleClassTraining,
    #[error("row {index} appears in more than one partition")]
    OverlappingPartitions { index: usize },
    #[error("subject {subject} appears in more than one partition")]
    SharedSubject { subject: String },
    #[error("row index {index} out of range for {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },
    #[error("dataset has no subject ids")]
    MissingSubjectIds,
    #[error("need at least two subjects, found {found}")]
    TooFewSubjects { found: usize },
    #[error("training fold without subject {subject} has a single class")]
    SingleClassFold { subject: String },
    #[error("ensemble needs at least one worker and a positive sample size")]
    EmptyEnsemble,
    #[error("ensemble worker {index} failed: {source}")]
    Worker { index: usize, source: Box<PipelineError> },
}
