//! Linear soft-margin SVM, Platt scaling and evaluation metrics.
//!
//! Binary problems use [`LinearSvmModel`]; the positive class is the larger
//! label. Problems with more classes go through [`OvrSvmModel`], one binary
//! machine per class with the largest decision value winning.

mod metrics;
mod platt;
mod svm;

pub use metrics::{evaluate, evaluate_with_classes, mean_metrics, roc_curve, EvalReport, MeanMetrics};
pub use platt::{platt_fit, platt_fit_scores, PlattParams};
pub use svm::{
    dual_objective, svm_decision, svm_fit, svm_predict, svm_train, Classifier, LabelMap, LinearSvmModel, OvrSvmModel,
    SvmParams, SvmSolution,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("binary classifier given {found} classes")]
    TooManyClasses { found: usize },
    #[error("no convergence after {updates} coordinate updates (KKT violation {violation:e})")]
    NonConvergence { updates: u64, violation: f64 },
    #[error("expected {expected} feature columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("need at least two observations, found {found}")]
    TooFewSamples { found: usize },
}
