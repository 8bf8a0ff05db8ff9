use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{run_single, Dataset, Executor, ExperimentConfig, GridPoint, ParamGrid, PipelineError};

/// One grid combination's outcome; failures carry the error text.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TuningRow {
    pub point: GridPoint,
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
    pub retained_d: Option<usize>,
    pub error: Option<String>,
}

/// Sorts by accuracy (descending), ties by the lexicographic order of the
/// parameters; failed rows go last.
pub fn rank_rows(rows: &mut [TuningRow]) {
    rows.sort_by(|a, b| match (a.accuracy, b.accuracy) {
        (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.point.lex_cmp(&b.point)),
        (Some(_), None) => core::cmp::Ordering::Less,
        (None, Some(_)) => core::cmp::Ordering::Greater,
        (None, None) => a.point.lex_cmp(&b.point),
    });
}

/// Runs every combination of `grid` around `base` with `run_single` on the
/// tuning subsets and returns the ranked table.
pub fn grid_search<E: Executor>(
    train: &Dataset,
    test: &Dataset,
    base: &ExperimentConfig,
    grid: &ParamGrid,
    exec: &E,
) -> Result<Vec<TuningRow>, PipelineError> {
    let points = grid.points(base)?;
    let mut rows = exec.map(points, |_, point| {
        let cfg = point.apply(base);
        match run_single(train, test, &cfg) {
            Ok(out) => TuningRow {
                point,
                accuracy: Some(out.report.accuracy),
                auc: out.report.auc,
                retained_d: Some(out.projector.d()),
                error: None,
            },
            Err(e) => TuningRow { point, accuracy: None, auc: None, retained_d: None, error: Some(e.to_string()) },
        }
    });
    rank_rows(&mut rows);
    Ok(rows)
}

/// The best `k` successful rows.
pub fn top_k(rows: &[TuningRow], k: usize) -> Vec<TuningRow> {
    rows.iter().filter(|r| r.accuracy.is_some()).take(k).cloned().collect()
}
