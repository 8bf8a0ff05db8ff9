use alloc::string::String;
use alloc::vec::Vec;

use super::split::subject_groups;
use super::{run_single, Dataset, Executor, ExperimentConfig, PipelineError};
use crate::classify::{mean_metrics, EvalReport, MeanMetrics};
use crate::hsic::distinct_sorted;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LopoFold {
    pub subject: String,
    pub test_indices: Vec<usize>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LopoResult {
    /// One fold per subject, subjects ascending.
    pub folds: Vec<LopoFold>,
    pub mean: MeanMetrics,
}

/// Test indices of each leave-one-subject-out fold, subjects ascending.
pub fn lopo_folds(data: &Dataset) -> Result<Vec<(String, Vec<usize>)>, PipelineError> {
    let ids = data.subject_id().ok_or(PipelineError::MissingSubjectIds)?;
    let groups = subject_groups(ids);
    if groups.len() < 2 {
        return Err(PipelineError::TooFewSubjects { found: groups.len() });
    }
    Ok(groups)
}

/// Leave-one-person-out cross-validation. Every fold is checked for a
/// two-class training set before any fitting starts.
pub fn lopo_cv<E: Executor>(data: &Dataset, cfg: &ExperimentConfig, exec: &E) -> Result<LopoResult, PipelineError> {
    let groups = lopo_folds(data)?;
    let mut work = Vec::with_capacity(groups.len());
    for (subject, test_idx) in groups {
        let mut in_test = alloc::vec![false; data.n()];
        for &i in &test_idx {
            in_test[i] = true;
        }
        let train_idx: Vec<usize> = (0..data.n()).filter(|&i| !in_test[i]).collect();
        let train_labels: Vec<i64> = train_idx.iter().map(|&i| data.y()[i]).collect();
        if distinct_sorted(&train_labels).len() < 2 {
            return Err(PipelineError::SingleClassFold { subject });
        }
        work.push((subject, train_idx, test_idx));
    }
    let results = exec.map(work, |_, (subject, train_idx, test_idx)| {
        let train = data.subset(&train_idx)?;
        let test = data.subset(&test_idx)?;
        let report = run_single(&train, &test, cfg)?.report;
        Ok::<_, PipelineError>(LopoFold { subject, test_indices: test_idx, report })
    });
    let folds = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let reports: Vec<EvalReport> = folds.iter().map(|f| f.report.clone()).collect();
    Ok(LopoResult { mean: mean_metrics(&reports), folds })
}
