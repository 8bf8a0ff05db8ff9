use alloc::vec::Vec;

use super::split::stratified_split;
use super::{grid_search, run_single, Dataset, Executor, ExperimentConfig, ParamGrid, PipelineError, TuningRow};
use crate::classify::{EvalReport, SvmParams};
use crate::dimred::{DrSpec, FitReport};
use crate::hsic::LinkSpec;
use crate::kernels::KernelSpec;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyMethod {
    pub base: ExperimentConfig,
    pub grid: ParamGrid,
}

/// Split, tune and test protocol for a simulation dataset.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyConfig {
    pub train_fraction: f64,
    pub split_seed: u64,
    /// Share of the training partition used to fit during tuning; the rest
    /// scores the grid.
    pub tune_fraction: f64,
    /// Tune against the test partition instead of a held-out piece of the
    /// training partition.
    pub allow_overlap: bool,
    pub methods: Vec<StudyMethod>,
}

pub const DELTA_GRID: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const COST_GRID: [f64; 3] = [0.1, 1.0, 10.0];

impl StudyConfig {
    /// Two-dimensional projections from PCA, KPCA, SKPCA (indicator link)
    /// and KLDA, plus a one-dimensional LDA baseline, with the default
    /// grids.
    pub fn simulation(split_seed: u64) -> Self {
        let rbf = KernelSpec::rbf(1.0);
        let kernel_grid =
            ParamGrid { delta: Some(DELTA_GRID.to_vec()), cost: Some(COST_GRID.to_vec()), ..ParamGrid::default() };
        let linear_grid = ParamGrid { cost: Some(COST_GRID.to_vec()), ..ParamGrid::default() };
        let method = |dr: DrSpec, grid: &ParamGrid| StudyMethod {
            base: ExperimentConfig { dr, svm: SvmParams::default(), platt: true },
            grid: grid.clone(),
        };
        Self {
            train_fraction: 0.5,
            split_seed,
            tune_fraction: 0.5,
            allow_overlap: false,
            methods: alloc::vec![
                method(DrSpec::Pca { d: 2 }, &linear_grid),
                method(DrSpec::Lda { d: 1 }, &linear_grid),
                method(DrSpec::Kpca { kernel: rbf, d: 2 }, &kernel_grid),
                method(DrSpec::Skpca { kernel: rbf, link: LinkSpec::Indicator, d: 2 }, &kernel_grid),
                method(DrSpec::Klda { kernel: rbf, d: 2 }, &kernel_grid),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyRow {
    pub best: ExperimentConfig,
    pub tuning: Vec<TuningRow>,
    pub report: EvalReport,
    pub fit: FitReport,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyResult {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub rows: Vec<StudyRow>,
}

/// Splits `data`, tunes each method on the tuning subsets and evaluates
/// the winning configuration on the test partition.
pub fn simulation_study<E: Executor>(
    data: &Dataset,
    cfg: &StudyConfig,
    exec: &E,
) -> Result<StudyResult, PipelineError> {
    let (train_idx, test_idx) = stratified_split(data.y(), cfg.train_fraction, cfg.split_seed);
    let train = data.subset(&train_idx)?;
    let test = data.subset(&test_idx)?;
    let (tune_train, tune_test) = if cfg.allow_overlap {
        (train.clone(), test.clone())
    } else {
        let (a, b) = stratified_split(train.y(), cfg.tune_fraction, cfg.split_seed.wrapping_add(1));
        (train.subset(&a)?, train.subset(&b)?)
    };
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for m in &cfg.methods {
        let tuning = grid_search(&tune_train, &tune_test, &m.base, &m.grid, exec)?;
        // Falls through to the next-ranked row if the refit on the full
        // training partition fails.
        let mut outcome = Err(PipelineError::NoSuccessfulGridRow);
        for row in tuning.iter().filter(|r| r.accuracy.is_some()) {
            let best = row.point.apply(&m.base);
            outcome = run_single(&train, &test, &best).map(|out| (best, out));
            if outcome.is_ok() {
                break;
            }
        }
        let (best, out) = outcome?;
        rows.push(StudyRow { best, tuning, report: out.report, fit: out.projector.report().clone() });
    }
    Ok(StudyResult { train_indices: train_idx, test_indices: test_idx, rows })
}
