//! Dimension reduction: PCA, LDA, KPCA, supervised KPCA (HSIC) and KLDA.
//!
//! Every method standardizes its training features first and stores the
//! [`Standardizer`] in the fitted [`Projector`], so `transform` accepts raw
//! features. Kernel methods keep the standardized training matrix because
//! test points are projected through `k(x_test, x_train)`.
//!
//! Projection conventions:
//!
//! * PCA, LDA: `Z · basis` on standardized `Z`.
//! * KPCA: `center_cross(K_test) · α` with `α = a/√λ`, so every component
//!   has unit norm in feature space.
//! * SKPCA, KLDA: `K_test · v` minus the training mean projection, mirroring
//!   the left-only centering in their objectives. `v` has unit norm.

mod kernel;
mod linear;
mod standardize;

use alloc::vec::Vec;

use crate::hsic::{HsicError, LinkSpec};
use crate::kernels::{center_cross_with, cross_gram, CenteringStats, KernelError, KernelSpec};
use crate::numerics::{Matrix, NumericsError};

pub use kernel::{fit_klda, fit_kpca, fit_skpca};
pub use linear::{fit_lda, fit_pca};
pub use standardize::{standardize_fit, Standardizer};

/// Rows per cross-Gram block in kernel `transform`.
pub const TRANSFORM_BLOCK: usize = 1024;

/// Retained dimension when none is given.
pub const DEFAULT_DIM: usize = 100;

/// Eigenvalues at or below `RANK_CUTOFF · λ₁` count as zero.
pub const RANK_CUTOFF: f64 = 1e-8;

/// KPCA drops components with `λ ≤ KPCA_CUTOFF · λ₁` before the `1/√λ`
/// normalization.
pub const KPCA_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DimRedError {
    #[error("need at least two classes, found {found}")]
    TooFewClasses { found: usize },
    #[error("class {label} has {count} member(s); at least two are required")]
    SmallClass { label: i64, count: usize },
    #[error("need at least two observations, found {found}")]
    TooFewSamples { found: usize },
    #[error("within-class matrix stayed singular after ridge escalation")]
    SingularWithin,
    #[error("expected {expected} feature columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{labels} labels for {rows} rows")]
    LabelMismatch { labels: usize, rows: usize },
    #[error("retained dimension must be positive")]
    ZeroDimension,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Hsic(#[from] HsicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    Pca,
    Lda,
    Kpca,
    Skpca,
    Klda,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pca => "pca",
            Self::Lda => "lda",
            Self::Kpca => "kpca",
            Self::Skpca => "skpca",
            Self::Klda => "klda",
        }
    }

    pub fn is_kernel(self) -> bool {
        matches!(self, Self::Kpca | Self::Skpca | Self::Klda)
    }
}

/// A dimension-reduction method with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "method", rename_all = "snake_case"))]
pub enum DrSpec {
    Pca { d: usize },
    Lda { d: usize },
    Kpca { kernel: KernelSpec, d: usize },
    Skpca { kernel: KernelSpec, link: LinkSpec, d: usize },
    Klda { kernel: KernelSpec, d: usize },
}

impl DrSpec {
    pub fn method(&self) -> Method {
        match self {
            Self::Pca { .. } => Method::Pca,
            Self::Lda { .. } => Method::Lda,
            Self::Kpca { .. } => Method::Kpca,
            Self::Skpca { .. } => Method::Skpca,
            Self::Klda { .. } => Method::Klda,
        }
    }

    pub fn d(&self) -> usize {
        match *self {
            Self::Pca { d } | Self::Lda { d } | Self::Kpca { d, .. } | Self::Skpca { d, .. } | Self::Klda { d, .. } => {
                d
            }
        }
    }

    pub fn kernel(&self) -> Option<KernelSpec> {
        match *self {
            Self::Kpca { kernel, .. } | Self::Skpca { kernel, .. } | Self::Klda { kernel, .. } => Some(kernel),
            _ => None,
        }
    }

    pub fn link(&self) -> Option<LinkSpec> {
        match *self {
            Self::Skpca { link, .. } => Some(link),
            _ => None,
        }
    }

    pub fn with_d(mut self, new_d: usize) -> Self {
        match &mut self {
            Self::Pca { d } | Self::Lda { d } | Self::Kpca { d, .. } | Self::Skpca { d, .. } | Self::Klda { d, .. } => {
                *d = new_d
            }
        }
        self
    }

    /// Replaces the RBF scale (kernel and, for a modified link, the link).
    /// No-op for linear methods and linear kernels.
    pub fn with_delta(mut self, new_delta: f64) -> Self {
        match &mut self {
            Self::Kpca { kernel, .. } | Self::Klda { kernel, .. } => set_delta(kernel, new_delta),
            Self::Skpca { kernel, link, .. } => {
                set_delta(kernel, new_delta);
                if let LinkSpec::Modified { delta, .. } = link {
                    *delta = new_delta;
                }
            }
            _ => {}
        }
        self
    }

    /// Replaces the link scale `eta`; no-op unless this is SKPCA with a
    /// modified link.
    pub fn with_eta(mut self, new_eta: f64) -> Self {
        if let Self::Skpca { link: LinkSpec::Modified { eta, .. }, .. } = &mut self {
            *eta = new_eta;
        }
        self
    }

    pub fn is_supervised(&self) -> bool {
        matches!(self.method(), Method::Lda | Method::Skpca | Method::Klda)
    }
}

fn set_delta(kernel: &mut KernelSpec, new_delta: f64) {
    if let KernelSpec::Rbf { delta } = kernel {
        *delta = new_delta;
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum FitWarning {
    /// The requested dimension exceeded what the method can produce.
    DimensionClamped { requested: usize, limit: usize },
    /// KPCA components with vanishing or negative eigenvalues were dropped.
    DimensionReduced { requested: usize, retained: usize },
    /// Fewer than the requested number of eigenvalues exceed the rank cutoff.
    RankDeficient { requested: usize, usable: usize },
    /// Constant training columns, mapped to zero.
    ConstantColumns { columns: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitReport {
    pub requested_d: usize,
    pub retained_d: usize,
    /// Ridge added to the right-hand matrix of a generalized problem.
    pub ridge: Option<f64>,
    pub rank_cutoff: f64,
    /// Largest normwise backward error over the retained eigenpairs.
    pub max_relative_residual: f64,
    pub warnings: Vec<FitWarning>,
}

/// A fitted dimension-reduction model. Immutable after fitting.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Projector {
    spec: DrSpec,
    standardizer: Standardizer,
    /// `p×d` loadings (PCA, LDA) or `n×d` dual coefficients.
    #[cfg_attr(feature = "serde", serde(with = "crate::numerics::serde_matrix"))]
    basis: Matrix,
    eigenvalues: Vec<f64>,
    /// Standardized training features, kernel methods only.
    #[cfg_attr(feature = "serde", serde(with = "crate::numerics::serde_matrix::option"))]
    train_x: Option<Matrix>,
    centering: Option<CenteringStats>,
    #[cfg_attr(feature = "serde", serde(with = "crate::numerics::serde_matrix"))]
    train_projections: Matrix,
    report: FitReport,
}

impl Projector {
    pub fn spec(&self) -> &DrSpec {
        &self.spec
    }

    pub fn method(&self) -> Method {
        self.spec.method()
    }

    /// Number of output columns.
    pub fn d(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn train_x(&self) -> Option<&Matrix> {
        self.train_x.as_ref()
    }

    pub fn centering(&self) -> Option<&CenteringStats> {
        self.centering.as_ref()
    }

    /// Projections of the training rows computed during fitting.
    pub fn train_projections(&self) -> &Matrix {
        &self.train_projections
    }

    pub fn report(&self) -> &FitReport {
        &self.report
    }

    pub fn input_dim(&self) -> usize {
        self.standardizer.dim()
    }

    /// Projects raw feature rows. Kernel methods work through row blocks of
    /// [`TRANSFORM_BLOCK`] so the cross-Gram matrix stays bounded.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix, DimRedError> {
        let z = self.standardizer.apply(x)?;
        if !self.method().is_kernel() {
            return Ok(z * &self.basis);
        }
        let mut out = Matrix::zeros(z.nrows(), self.d());
        let mut start = 0;
        while start < z.nrows() {
            let len = TRANSFORM_BLOCK.min(z.nrows() - start);
            let block = self.kernel_block(&z.rows(start, len).into_owned())?;
            out.rows_mut(start, len).copy_from(&block);
            start += len;
        }
        Ok(out)
    }

    fn kernel_block(&self, z: &Matrix) -> Result<Matrix, DimRedError> {
        let kernel = self.spec.kernel().expect("kernel method");
        let cross = cross_gram(&kernel, self.kernel_train(), z)?;
        if self.method() == Method::Kpca {
            let centered = center_cross_with(self.centering_stats(), &cross)?;
            return Ok(centered * &self.basis);
        }
        let mut out = cross * &self.basis;
        let offsets = output_offsets(self.centering_stats(), &self.basis);
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col.add_scalar_mut(-offsets[j]);
        }
        Ok(out)
    }

    fn kernel_train(&self) -> &Matrix {
        self.train_x.as_ref().expect("kernel projector stores its training features")
    }

    fn centering_stats(&self) -> &CenteringStats {
        self.centering.as_ref().expect("kernel projector stores centering statistics")
    }
}

/// Mean training projection per component, `row_means · v_j`.
fn output_offsets(stats: &CenteringStats, basis: &Matrix) -> Vec<f64> {
    basis.column_iter().map(|c| c.iter().zip(&stats.row_means).map(|(a, b)| a * b).sum()).collect()
}

/// Fits the method described by `spec`. `y` is ignored by PCA and KPCA.
pub fn fit(spec: &DrSpec, x: &Matrix, y: &[i64]) -> Result<Projector, DimRedError> {
    match *spec {
        DrSpec::Pca { d } => fit_pca(x, d),
        DrSpec::Lda { d } => fit_lda(x, y, d),
        DrSpec::Kpca { kernel, d } => fit_kpca(x, &kernel, d),
        DrSpec::Skpca { kernel, link, d } => fit_skpca(x, y, &kernel, &link, d),
        DrSpec::Klda { kernel, d } => fit_klda(x, y, &kernel, d),
    }
}

pub fn transform(projector: &Projector, x: &Matrix) -> Result<Matrix, DimRedError> {
    projector.transform(x)
}

/// Clamps `requested` to `limit`, recording the clamp.
fn clamp_dim(requested: usize, limit: usize, warnings: &mut Vec<FitWarning>) -> Result<usize, DimRedError> {
    if requested == 0 {
        return Err(DimRedError::ZeroDimension);
    }
    if requested > limit {
        warnings.push(FitWarning::DimensionClamped { requested, limit });
        Ok(limit)
    } else {
        Ok(requested)
    }
}

fn check_labels(x: &Matrix, y: &[i64]) -> Result<(), DimRedError> {
    if y.len() != x.nrows() {
        return Err(DimRedError::LabelMismatch { labels: y.len(), rows: x.nrows() });
    }
    Ok(())
}

/// Distinct labels (ascending) with their row indices; every class needs at
/// least two members and there must be at least two classes.
fn class_groups(y: &[i64]) -> Result<Vec<(i64, Vec<usize>)>, DimRedError> {
    let classes = crate::hsic::distinct_sorted(y);
    if classes.len() < 2 {
        return Err(DimRedError::TooFewClasses { found: classes.len() });
    }
    let groups: Vec<(i64, Vec<usize>)> =
        classes.iter().map(|&c| (c, y.iter().enumerate().filter(|(_, &v)| v == c).map(|(i, _)| i).collect())).collect();
    for (label, idx) in &groups {
        if idx.len() < 2 {
            return Err(DimRedError::SmallClass { label: *label, count: idx.len() });
        }
    }
    Ok(groups)
}

fn constant_warning(s: &Standardizer, warnings: &mut Vec<FitWarning>) {
    let columns = s.constant_columns();
    if !columns.is_empty() {
        warnings.push(FitWarning::ConstantColumns { columns });
    }
}

fn escalation_error(e: NumericsError) -> DimRedError {
    match e {
        NumericsError::NotPositiveDefinite { .. } => DimRedError::SingularWithin,
        other => DimRedError::Numerics(other),
    }
}
