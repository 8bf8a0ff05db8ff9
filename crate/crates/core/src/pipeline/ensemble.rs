use alloc::boxed::Box;
use alloc::vec::Vec;

use super::split::bootstrap_indices;
use super::{run_single, Dataset, Executor, ExperimentConfig, PipelineError};
use crate::classify::{evaluate_with_classes, EvalReport};
use crate::hsic::distinct_sorted;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleConfig {
    pub n_samples: usize,
    pub sample_size: usize,
    /// Worker `i` (1-based) samples with seed `base_seed + i`.
    pub base_seed: u64,
}

impl EnsembleConfig {
    pub fn seeds(&self) -> Vec<u64> {
        (1..=self.n_samples as u64).map(|i| self.base_seed.wrapping_add(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WorkerOutput {
    pub index: usize,
    pub seed: u64,
    pub predictions: Vec<i64>,
    pub scores: Option<Vec<f64>>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleResult {
    /// Sorted by worker index.
    pub workers: Vec<WorkerOutput>,
    pub predictions: Vec<i64>,
    /// Mean worker score per test point, when every worker has scores.
    pub scores: Option<Vec<f64>>,
    pub report: EvalReport,
}

/// Plurality vote per column; ties go to the largest label, which for two
/// classes is the positive one.
pub fn majority_vote(predictions: &[Vec<i64>]) -> Vec<i64> {
    let m = predictions.first().map_or(0, Vec::len);
    (0..m)
        .map(|j| {
            let votes: Vec<i64> = predictions.iter().map(|p| p[j]).collect();
            let mut best = (0usize, i64::MIN);
            for c in distinct_sorted(&votes) {
                let count = votes.iter().filter(|&&v| v == c).count();
                if count >= best.0 {
                    best = (count, c);
                }
            }
            best.1
        })
        .collect()
}

/// Combines worker outputs in index order, so the result does not depend
/// on the order they arrive in.
pub fn merge_workers(
    mut workers: Vec<WorkerOutput>,
    y_true: &[i64],
    classes: &[i64],
) -> Result<EnsembleResult, PipelineError> {
    if workers.is_empty() {
        return Err(PipelineError::EmptyEnsemble);
    }
    workers.sort_by_key(|w| w.index);
    let preds: Vec<Vec<i64>> = workers.iter().map(|w| w.predictions.clone()).collect();
    let predictions = majority_vote(&preds);
    let scores = workers.iter().map(|w| w.scores.as_ref()).collect::<Option<Vec<_>>>().map(|all| {
        (0..y_true.len()).map(|j| all.iter().map(|s| s[j]).sum::<f64>() / all.len() as f64).collect::<Vec<f64>>()
    });
    let mut cls = classes.to_vec();
    cls.extend_from_slice(y_true);
    let report = evaluate_with_classes(&distinct_sorted(&cls), y_true, &predictions, scores.as_deref())?;
    Ok(EnsembleResult { workers, predictions, scores, report })
}

/// Trains one model per bootstrap sample of `m1` and majority-votes their
/// predictions on `m2`. Any worker failure fails the ensemble.
pub fn bootstrap_ensemble<E: Executor>(
    m1: &Dataset,
    m2: &Dataset,
    cfg: &ExperimentConfig,
    ens: &EnsembleConfig,
    exec: &E,
) -> Result<EnsembleResult, PipelineError> {
    bootstrap_ensemble_with_seeds(m1, m2, cfg, &ens.seeds(), ens.sample_size, exec)
}

pub fn bootstrap_ensemble_with_seeds<E: Executor>(
    m1: &Dataset,
    m2: &Dataset,
    cfg: &ExperimentConfig,
    seeds: &[u64],
    sample_size: usize,
    exec: &E,
) -> Result<EnsembleResult, PipelineError> {
    if seeds.is_empty() || sample_size == 0 {
        return Err(PipelineError::EmptyEnsemble);
    }
    let items: Vec<u64> = seeds.to_vec();
    let results = exec.map(items, |index, seed| {
        let sample = m1.subset(&bootstrap_indices(m1.n(), sample_size, seed))?;
        let out = run_single(&sample, m2, cfg).map_err(|e| PipelineError::Worker { index, source: Box::new(e) })?;
        Ok::<_, PipelineError>(WorkerOutput {
            index,
            seed,
            predictions: out.predictions,
            scores: out.scores,
            report: out.report,
        })
    });
    let workers = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    merge_workers(workers, m2.y(), &m1.classes())
}
