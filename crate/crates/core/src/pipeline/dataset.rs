use alloc::string::String;
use alloc::vec::Vec;

use crate::hsic::distinct_sorted;
use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("{labels} labels for {rows} rows")]
    LabelMismatch { labels: usize, rows: usize },
    #[error("{ids} subject ids for {rows} rows")]
    SubjectMismatch { ids: usize, rows: usize },
    #[error("{names} feature names for {cols} columns")]
    NameMismatch { names: usize, cols: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("row index {index} out of range for {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },
    #[error("column counts differ: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
}

/// Features, labels and optional subject identifiers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    #[cfg_attr(feature = "serde", serde(with = "crate::numerics::serde_matrix"))]
    x: Matrix,
    y: Vec<i64>,
    subject_id: Option<Vec<String>>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<i64>) -> Result<Self, DatasetError> {
        Self::with_metadata(x, y, None, None)
    }

    pub fn with_metadata(
        x: Matrix,
        y: Vec<i64>,
        subject_id: Option<Vec<String>>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self, DatasetError> {
        if y.len() != x.nrows() {
            return Err(DatasetError::LabelMismatch { labels: y.len(), rows: x.nrows() });
        }
        if let Some(s) = &subject_id {
            if s.len() != x.nrows() {
                return Err(DatasetError::SubjectMismatch { ids: s.len(), rows: x.nrows() });
            }
        }
        if let Some(f) = &feature_names {
            if f.len() != x.ncols() {
                return Err(DatasetError::NameMismatch { names: f.len(), cols: x.ncols() });
            }
        }
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                if !x[(i, j)].is_finite() {
                    return Err(DatasetError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { x, y, subject_id, feature_names })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[i64] {
        &self.y
    }

    pub fn subject_id(&self) -> Option<&[String]> {
        self.subject_id.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.n() == 0
    }

    /// Distinct labels, ascending.
    pub fn classes(&self) -> Vec<i64> {
        distinct_sorted(&self.y)
    }

    pub fn class_counts(&self) -> Vec<(i64, usize)> {
        self.classes().into_iter().map(|c| (c, self.y.iter().filter(|&&v| v == c).count())).collect()
    }

    /// Rows at `idx`, in that order (repeats allowed).
    pub fn subset(&self, idx: &[usize]) -> Result<Self, DatasetError> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.n()) {
            return Err(DatasetError::IndexOutOfRange { index: bad, rows: self.n() });
        }
        let x = Matrix::from_fn(idx.len(), self.p(), |i, j| self.x[(idx[i], j)]);
        Ok(Self {
            x,
            y: idx.iter().map(|&i| self.y[i]).collect(),
            subject_id: self.subject_id.as_ref().map(|s| idx.iter().map(|&i| s[i].clone()).collect()),
            feature_names: self.feature_names.clone(),
        })
    }

    /// Rows of `self` followed by rows of `other`. Subject ids survive only
    /// when both sides carry them.
    pub fn concat(&self, other: &Self) -> Result<Self, DatasetError> {
        if self.p() != other.p() {
            return Err(DatasetError::WidthMismatch { left: self.p(), right: other.p() });
        }
        let (n1, n2) = (self.n(), other.n());
        let x = Matrix::from_fn(n1 + n2, self.p(), |i, j| if i < n1 { self.x[(i, j)] } else { other.x[(i - n1, j)] });
        let mut y = self.y.clone();
        y.extend_from_slice(&other.y);
        let subject_id = match (&self.subject_id, &other.subject_id) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        Ok(Self { x, y, subject_id, feature_names: self.feature_names.clone() })
    }
}
