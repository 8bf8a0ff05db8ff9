//! Link matrices over labels and the empirical HSIC estimator
//! `(1/(n−1)²)·tr(K H L H)`.

use alloc::vec::Vec;

use crate::kernels::{double_center, rows_of, GramMatrix};
use crate::numerics::{Matrix, SymMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HsicError {
    #[error("modified link requires the feature matrix")]
    MissingFeatures,
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("HSIC needs at least two observations")]
    DegenerateSample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LinkSpec {
    /// `L_ij = 1(y_i = y_j)`.
    Indicator,
    /// `L_ij = 1(y_i = y_j)·exp(−eta·delta·‖x_i − x_j‖²)`.
    Modified { eta: f64, delta: f64 },
}

/// Symmetric `n×n` label-similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMatrix(SymMatrix);

impl LinkMatrix {
    pub fn n(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        self.0.as_matrix()
    }

    pub fn entries(&self) -> &SymMatrix {
        &self.0
    }

    /// Wraps an arbitrary symmetric matrix; used by tests that need link
    /// matrices outside the two supported kinds.
    pub fn from_sym(m: SymMatrix) -> Self {
        Self(m)
    }
}

pub fn link_matrix(spec: &LinkSpec, y: &[i64], x: Option<&Matrix>) -> Result<LinkMatrix, HsicError> {
    let n = y.len();
    let m = match *spec {
        LinkSpec::Indicator => Matrix::from_fn(n, n, |i, j| if y[i] == y[j] { 1.0 } else { 0.0 }),
        LinkSpec::Modified { eta, delta } => {
            let x = x.ok_or(HsicError::MissingFeatures)?;
            if x.nrows() != n {
                return Err(HsicError::SizeMismatch { left: x.nrows(), right: n });
            }
            let p = x.ncols();
            let rows = rows_of(x);
            let scale = eta * delta;
            let mut m = Matrix::zeros(n, n);
            for j in 0..n {
                m[(j, j)] = 1.0;
                for i in (j + 1)..n {
                    if y[i] != y[j] {
                        continue;
                    }
                    let d2: f64 = rows[i * p..(i + 1) * p]
                        .iter()
                        .zip(&rows[j * p..(j + 1) * p])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    let v = libm::exp(-scale * d2);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            m
        }
    };
    Ok(LinkMatrix(SymMatrix::new(m).expect("link matrix is symmetric by construction")))
}

/// `n×C` class-indicator matrix `F` with `F Fᵀ` equal to the indicator
/// link. Columns follow the ascending order of distinct labels.
pub fn indicator_factor(y: &[i64]) -> Matrix {
    let classes = distinct_sorted(y);
    Matrix::from_fn(y.len(), classes.len(), |i, c| if y[i] == classes[c] { 1.0 } else { 0.0 })
}

pub(crate) fn distinct_sorted(y: &[i64]) -> Vec<i64> {
    let mut c: Vec<i64> = y.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

/// Empirical HSIC, `(1/(n−1)²)·tr(K H L H)`.
///
/// `H L H` is formed once by mean removal; the trace of a product of two
/// symmetric matrices is then the sum of their elementwise product.
pub fn hsic_empirical(k: &GramMatrix, l: &LinkMatrix) -> Result<f64, HsicError> {
    let n = k.n();
    if l.n() != n {
        return Err(HsicError::SizeMismatch { left: n, right: l.n() });
    }
    if n < 2 {
        return Err(HsicError::DegenerateSample);
    }
    let lc = double_center(l.matrix());
    let tr: f64 = k.matrix().iter().zip(lc.iter()).map(|(a, b)| a * b).sum();
    let d = (n - 1) as f64;
    Ok(tr / (d * d))
}

/// `A = K H L H K`, symmetrized to absorb round-off.
pub fn skpca_objective_matrix(k: &GramMatrix, l: &LinkMatrix) -> Result<SymMatrix, HsicError> {
    let n = k.n();
    if l.n() != n {
        return Err(HsicError::SizeMismatch { left: n, right: l.n() });
    }
    let lc = double_center(l.matrix());
    let km = k.matrix();
    let a = km * (lc * km);
    Ok(SymMatrix::symmetrize(a).expect("K H L H K is symmetric"))
}
