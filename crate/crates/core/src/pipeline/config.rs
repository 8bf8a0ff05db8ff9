use alloc::vec::Vec;
use core::cmp::Ordering;

use super::PipelineError;
use crate::classify::SvmParams;
use crate::dimred::DrSpec;

/// One dimension-reduction method followed by a linear SVM.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentConfig {
    pub dr: DrSpec,
    pub svm: SvmParams,
    /// Fit a Platt sigmoid on the training projections (binary only).
    pub platt: bool,
}

impl ExperimentConfig {
    pub fn new(dr: DrSpec) -> Self {
        Self { dr, svm: SvmParams::default(), platt: true }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(PipelineError::InvalidParameter { name, value: v })
            }
        };
        finite("cost", self.svm.cost)?;
        finite("tol", self.svm.tol)?;
        if let Some(delta) = self.dr.kernel().and_then(|k| k.delta()) {
            finite("delta", delta)?;
        }
        if let Some(crate::hsic::LinkSpec::Modified { eta, delta }) = self.dr.link() {
            if !(eta.is_finite() && eta >= 0.0) {
                return Err(PipelineError::InvalidParameter { name: "eta", value: eta });
            }
            finite("delta", delta)?;
        }
        if self.dr.d() == 0 {
            return Err(PipelineError::InvalidParameter { name: "d", value: 0.0 });
        }
        Ok(())
    }
}

/// Candidate values per tunable parameter; `None` keeps the base value.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ParamGrid {
    #[cfg_attr(feature = "serde", serde(default))]
    pub delta: Option<Vec<f64>>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub eta: Option<Vec<f64>>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub cost: Option<Vec<f64>>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub d: Option<Vec<usize>>,
}

/// A single grid combination. `delta`/`eta` are absent when the method
/// has no such parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridPoint {
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub cost: f64,
    pub d: usize,
}

impl GridPoint {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        let eta = match cfg.dr.link() {
            Some(crate::hsic::LinkSpec::Modified { eta, .. }) => Some(eta),
            _ => None,
        };
        Self { delta: cfg.dr.kernel().and_then(|k| k.delta()), eta, cost: cfg.svm.cost, d: cfg.dr.d() }
    }

    pub fn apply(&self, base: &ExperimentConfig) -> ExperimentConfig {
        let mut dr = base.dr.with_d(self.d);
        if let Some(delta) = self.delta {
            dr = dr.with_delta(delta);
        }
        if let Some(eta) = self.eta {
            dr = dr.with_eta(eta);
        }
        ExperimentConfig { dr, svm: SvmParams { cost: self.cost, ..base.svm }, platt: base.platt }
    }

    /// Lexicographic order on `(delta, eta, cost, d)`.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        fn opt(a: Option<f64>, b: Option<f64>) -> Ordering {
            match (a, b) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                (a, b) => a.is_some().cmp(&b.is_some()),
            }
        }
        opt(self.delta, other.delta)
            .then(opt(self.eta, other.eta))
            .then(self.cost.total_cmp(&other.cost))
            .then(self.d.cmp(&other.d))
    }
}

impl ParamGrid {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let axes: [(&'static str, Option<usize>); 4] = [
            ("delta", self.delta.as_ref().map(Vec::len)),
            ("eta", self.eta.as_ref().map(Vec::len)),
            ("cost", self.cost.as_ref().map(Vec::len)),
            ("d", self.d.as_ref().map(Vec::len)),
        ];
        for (name, len) in axes {
            if len == Some(0) {
                return Err(PipelineError::EmptyGrid { axis: name });
            }
        }
        for (name, vals) in [("delta", &self.delta), ("eta", &self.eta), ("cost", &self.cost)] {
            for &v in vals.iter().flatten() {
                let ok = v.is_finite() && if name == "eta" { v >= 0.0 } else { v > 0.0 };
                if !ok {
                    return Err(PipelineError::InvalidParameter { name, value: v });
                }
            }
        }
        if let Some(&bad) = self.d.iter().flatten().find(|&&d| d == 0) {
            return Err(PipelineError::InvalidParameter { name: "d", value: bad as f64 });
        }
        Ok(())
    }

    /// Every combination, delta varying slowest and d fastest. Axes the
    /// method does not use collapse to the base value.
    pub fn points(&self, base: &ExperimentConfig) -> Result<Vec<GridPoint>, PipelineError> {
        self.validate()?;
        let b = GridPoint::of(base);
        let deltas: Vec<Option<f64>> = match (&self.delta, b.delta) {
            (Some(v), Some(_)) => v.iter().copied().map(Some).collect(),
            _ => alloc::vec![b.delta],
        };
        let etas: Vec<Option<f64>> = match (&self.eta, b.eta) {
            (Some(v), Some(_)) => v.iter().copied().map(Some).collect(),
            _ => alloc::vec![b.eta],
        };
        let costs = self.cost.clone().unwrap_or_else(|| alloc::vec![b.cost]);
        let ds = self.d.clone().unwrap_or_else(|| alloc::vec![b.d]);
        let mut out = Vec::with_capacity(deltas.len() * etas.len() * costs.len() * ds.len());
        for &delta in &deltas {
            for &eta in &etas {
                for &cost in &costs {
                    for &d in &ds {
                        out.push(GridPoint { delta, eta, cost, d });
                    }
                }
            }
        }
        Ok(out)
    }
}
