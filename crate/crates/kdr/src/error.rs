use std::path::PathBuf;

use kdr_core::classify::ClassifyError;
use kdr_core::dimred::DimRedError;
use kdr_core::pipeline::{DatasetError, PipelineError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    DimRed(#[from] DimRedError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{0}")]
    Usage(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("rerun differs from the recorded result at {0}")]
    RerunMismatch(String),
}

impl Error {
    pub fn schema(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Schema { path: path.into(), message: message.into() }
    }

    /// Name of the innermost error variant, e.g. `NonConvergence` for a
    /// solver failure wrapped by the pipeline.
    pub fn name(&self) -> String {
        match self {
            Self::Pipeline(e) => innermost(&format!("{e:?}")),
            Self::DimRed(e) => innermost(&format!("{e:?}")),
            Self::Classify(e) => innermost(&format!("{e:?}")),
            Self::Dataset(e) => innermost(&format!("{e:?}")),
            other => innermost(&format!("{other:?}")),
        }
    }
}

/// Follows tuple-variant wrappers in a `Debug` rendering down to the first
/// variant that is not a plain wrapper.
fn innermost(debug: &str) -> String {
    let mut s = debug;
    loop {
        let end = s.find(|c: char| !c.is_alphanumeric() && c != '_').unwrap_or(s.len());
        let name = &s[..end];
        let rest = &s[end..];
        match rest.strip_prefix('(') {
            Some(inner) if inner.starts_with(|c: char| c.is_ascii_uppercase()) => s = inner,
            _ => return name.to_string(),
        }
    }
}
