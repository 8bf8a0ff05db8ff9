use alloc::vec::Vec;

use super::{Dataset, ExperimentConfig, PipelineError};
use crate::classify::{evaluate_with_classes, mean_metrics, platt_fit, Classifier, EvalReport, MeanMetrics};
use crate::dimred::{fit, Projector};
use crate::hsic::distinct_sorted;
use crate::numerics::Matrix;

/// Everything produced by one train/test run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunOutput {
    pub projector: Projector,
    pub classifier: Classifier,
    #[cfg_attr(feature = "serde", serde(with = "crate::numerics::serde_matrix"))]
    pub train_projection: Matrix,
    #[cfg_attr(feature = "serde", serde(with = "crate::numerics::serde_matrix"))]
    pub test_projection: Matrix,
    pub predictions: Vec<i64>,
    /// Positive-class scores (binary only).
    pub scores: Option<Vec<f64>>,
    pub report: EvalReport,
}

/// Fits the projector on `train` and the SVM (Platt-calibrated when binary
/// and `cfg.platt` is set) on its training projections.
pub fn fit_model(train: &Dataset, cfg: &ExperimentConfig) -> Result<(Projector, Classifier), PipelineError> {
    cfg.validate()?;
    if train.classes().len() < 2 {
        return Err(PipelineError::SingleClassTraining);
    }
    let projector = fit(&cfg.dr, train.x(), train.y())?;
    let train_projection = projector.train_projections();
    let mut classifier = Classifier::fit(train_projection, train.y(), &cfg.svm)?;
    if cfg.platt {
        if let Classifier::Binary(m) = &classifier {
            classifier = Classifier::Binary(platt_fit(m, train_projection, train.y())?);
        }
    }
    Ok((projector, classifier))
}

/// Test-side output of a fitted model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Evaluation {
    #[cfg_attr(feature = "serde", serde(with = "crate::numerics::serde_matrix"))]
    pub projection: Matrix,
    pub predictions: Vec<i64>,
    pub scores: Option<Vec<f64>>,
    pub report: EvalReport,
}

/// Projects `test`, predicts, and scores against the union of the
/// classifier's classes and the test labels.
pub fn evaluate_model(
    projector: &Projector,
    classifier: &Classifier,
    test: &Dataset,
) -> Result<Evaluation, PipelineError> {
    let projection = projector.transform(test.x())?;
    let predictions = classifier.predict(&projection)?;
    let scores = classifier.scores(&projection)?;
    let mut classes = classifier.classes();
    classes.extend_from_slice(test.y());
    let report = evaluate_with_classes(&distinct_sorted(&classes), test.y(), &predictions, scores.as_deref())?;
    Ok(Evaluation { projection, predictions, scores, report })
}

/// Fits on `train` and evaluates on `test`.
pub fn run_single(train: &Dataset, test: &Dataset, cfg: &ExperimentConfig) -> Result<RunOutput, PipelineError> {
    let (projector, classifier) = fit_model(train, cfg)?;
    let eval = evaluate_model(&projector, &classifier, test)?;
    Ok(RunOutput {
        train_projection: projector.train_projections().clone(),
        projector,
        classifier,
        test_projection: eval.projection,
        predictions: eval.predictions,
        scores: eval.scores,
        report: eval.report,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlternatingResult {
    /// Train on S1 / test on S2 ∪ R, then train on S2 / test on S1 ∪ R.
    pub runs: Vec<EvalReport>,
    pub mean: MeanMetrics,
}

pub fn alternating_protocol(
    s1: &Dataset,
    s2: &Dataset,
    r: &Dataset,
    cfg: &ExperimentConfig,
) -> Result<AlternatingResult, PipelineError> {
    let first = run_single(s1, &s2.concat(r)?, cfg)?.report;
    let second = run_single(s2, &s1.concat(r)?, cfg)?.report;
    let runs = alloc::vec![first, second];
    let mean = mean_metrics(&runs);
    Ok(AlternatingResult { runs, mean })
}
