use alloc::vec::Vec;

use super::DimRedError;
use crate::numerics::Matrix;

/// Column-wise z-scoring fitted on training data.
///
/// Constant columns keep `std = 1` and are flagged; they map to zeros.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardizer {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn constant_columns(&self) -> Vec<usize> {
        self.constant.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| i).collect()
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix, DimRedError> {
        if x.ncols() != self.dim() {
            return Err(DimRedError::DimensionMismatch { expected: self.dim(), found: x.ncols() });
        }
        Ok(Matrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            if self.constant[j] {
                0.0
            } else {
                (x[(i, j)] - self.means[j]) / self.stds[j]
            }
        }))
    }
}

/// Fits a [`Standardizer`] (sample standard deviation, `n − 1`) and returns
/// it with the standardized copy of `x`.
pub fn standardize_fit(x: &Matrix) -> Result<(Standardizer, Matrix), DimRedError> {
    let n = x.nrows();
    if n < 2 {
        return Err(DimRedError::TooFewSamples { found: n });
    }
    let nf = n as f64;
    let mut means = Vec::with_capacity(x.ncols());
    let mut stds = Vec::with_capacity(x.ncols());
    let mut constant = Vec::with_capacity(x.ncols());
    for col in x.column_iter() {
        let mean = col.sum() / nf;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = libm::sqrt(ss / (nf - 1.0));
        let is_const = !(sd > 1e-12 * mean.abs().max(1.0));
        means.push(mean);
        stds.push(if is_const { 1.0 } else { sd });
        constant.push(is_const);
    }
    let s = Standardizer { means, stds, constant };
    let z = s.apply(x)?;
    Ok((s, z))
}
