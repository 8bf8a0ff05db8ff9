//! Kernel evaluation, Gram matrices and feature-space centering.
//!
//! Feature matrices are `n×p` with one observation per row. The RBF kernel
//! is always `exp(−delta·‖x−y‖²)`; a negative `delta` is allowed and yields
//! an indefinite kernel.

use alloc::vec::Vec;

use crate::numerics::{Matrix, SymMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("gram matrix is already centered")]
    AlreadyCentered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum KernelSpec {
    Rbf { delta: f64 },
    Linear,
}

impl KernelSpec {
    pub fn rbf(delta: f64) -> Self {
        Self::Rbf { delta }
    }

    /// Builds an RBF kernel from a scale written in the positive-exponent
    /// form `exp(δ‖x−y‖²)`, as used by published tuning grids.
    pub fn rbf_from_positive_exponent(delta: f64) -> Self {
        Self::Rbf { delta: -delta }
    }

    pub fn delta(&self) -> Option<f64> {
        match *self {
            Self::Rbf { delta } => Some(delta),
            Self::Linear => None,
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
        if x.len() != y.len() {
            return Err(KernelError::DimensionMismatch { left: x.len(), right: y.len() });
        }
        Ok(self.eval_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Self::Rbf { delta } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                libm::exp(-delta * d2)
            }
            Self::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        }
    }
}

/// Free-function form of [`KernelSpec::eval`].
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
    spec.eval(x, y)
}

/// An `n×n` matrix of kernel evaluations, flagged when it has been
/// double-centered.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: SymMatrix,
    centered: bool,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.entries.dim()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn entries(&self) -> &SymMatrix {
        &self.entries
    }

    pub fn matrix(&self) -> &Matrix {
        self.entries.as_matrix()
    }

    pub fn into_sym(self) -> SymMatrix {
        self.entries
    }

    /// Wraps an arbitrary symmetric matrix as an uncentered Gram matrix.
    pub fn from_sym(entries: SymMatrix) -> Self {
        Self { entries, centered: false }
    }

    /// Row means and grand mean, needed to center test-point kernels.
    pub fn centering_stats(&self) -> CenteringStats {
        let m = self.matrix();
        let n = m.nrows() as f64;
        let row_means: Vec<f64> = m.column_iter().map(|c| c.sum() / n).collect();
        let total_mean = row_means.iter().sum::<f64>() / n;
        CenteringStats { row_means, total_mean }
    }
}

/// Statistics of an uncentered training Gram matrix (symmetric, so row and
/// column means coincide).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CenteringStats {
    pub row_means: Vec<f64>,
    pub total_mean: f64,
}

/// Copies the rows of `x` into contiguous storage, one observation per slice.
pub(crate) fn rows_of(x: &Matrix) -> Vec<f64> {
    x.transpose().as_slice().to_vec()
}

pub fn gram(spec: &KernelSpec, x: &Matrix) -> GramMatrix {
    let n = x.nrows();
    let p = x.ncols();
    let rows = rows_of(x);
    let mut k = Matrix::zeros(n, n);
    // entries are independent, so the fill order does not affect the result
    for j in 0..n {
        let xj = &rows[j * p..(j + 1) * p];
        for i in j..n {
            let v = spec.eval_unchecked(&rows[i * p..(i + 1) * p], xj);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    GramMatrix { entries: SymMatrix::new(k).expect("mirrored fill is symmetric"), centered: false }
}

/// `H K H` for an arbitrary square matrix, computed from row/column means.
pub fn double_center(k: &Matrix) -> Matrix {
    let n = k.nrows();
    let nf = n as f64;
    let col_means: Vec<f64> = k.column_iter().map(|c| c.sum() / nf).collect();
    let row_means: Vec<f64> = k.row_iter().map(|r| r.sum() / nf).collect();
    let total = col_means.iter().sum::<f64>() / nf;
    Matrix::from_fn(n, n, |i, j| k[(i, j)] - row_means[i] - col_means[j] + total)
}

pub fn center_gram(k: &GramMatrix) -> Result<GramMatrix, KernelError> {
    if k.centered {
        return Err(KernelError::AlreadyCentered);
    }
    let c = double_center(k.matrix());
    Ok(GramMatrix { entries: SymMatrix::symmetrize(c).expect("centering preserves symmetry"), centered: true })
}

/// `m×n` matrix with entry `(i, j) = k(test_i, train_j)`.
pub fn cross_gram(spec: &KernelSpec, train: &Matrix, test: &Matrix) -> Result<Matrix, KernelError> {
    if train.ncols() != test.ncols() {
        return Err(KernelError::DimensionMismatch { left: train.ncols(), right: test.ncols() });
    }
    let p = train.ncols();
    let (n, m) = (train.nrows(), test.nrows());
    let tr = rows_of(train);
    let te = rows_of(test);
    Ok(Matrix::from_fn(m, n, |i, j| spec.eval_unchecked(&te[i * p..(i + 1) * p], &tr[j * p..(j + 1) * p])))
}

/// Centers test kernels against the training feature-space mean:
/// `Kc − 1 K/n − Kc 1/n + 1 K 1/n²`.
pub fn center_cross(train: &GramMatrix, cross: &Matrix) -> Result<Matrix, KernelError> {
    if train.centered {
        return Err(KernelError::AlreadyCentered);
    }
    center_cross_with(&train.centering_stats(), cross)
}

pub fn center_cross_with(stats: &CenteringStats, cross: &Matrix) -> Result<Matrix, KernelError> {
    let n = stats.row_means.len();
    if cross.ncols() != n {
        return Err(KernelError::DimensionMismatch { left: n, right: cross.ncols() });
    }
    let nf = n as f64;
    let test_means: Vec<f64> = cross.row_iter().map(|r| r.sum() / nf).collect();
    Ok(Matrix::from_fn(cross.nrows(), n, |i, j| cross[(i, j)] - stats.row_means[j] - test_means[i] + stats.total_mean))
}
