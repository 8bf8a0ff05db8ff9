use alloc::vec::Vec;

use super::{svm_decision, ClassifyError, LinearSvmModel};
use crate::numerics::Matrix;

/// Sigmoid `P(positive | f) = 1 / (1 + exp(a·f + b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlattParams {
    pub a: f64,
    pub b: f64,
}

impl PlattParams {
    /// Strictly inside `(0, 1)`.
    pub fn probability(&self, decision: f64) -> f64 {
        let t = self.a * decision + self.b;
        let p = if t >= 0.0 {
            let e = libm::exp(-t);
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + libm::exp(t))
        };
        p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    }
}

const MAX_ITER: usize = 100;
const GRAD_TOL: f64 = 1e-8;
const MIN_STEP: f64 = 1e-10;
const HESSIAN_SHIFT: f64 = 1e-12;

/// `log(1 + exp(t))` without overflow.
fn log1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}

/// Fits the sigmoid by damped Newton iterations on the regularized
/// negative log-likelihood, with targets `(N₊+1)/(N₊+2)` and `1/(N₋+2)`.
pub fn platt_fit_scores(decisions: &[f64], positive: &[bool]) -> Result<PlattParams, ClassifyError> {
    if decisions.len() != positive.len() {
        return Err(ClassifyError::LengthMismatch { left: decisions.len(), right: positive.len() });
    }
    let n_pos = positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = positive.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(ClassifyError::SingleClass);
    }
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let targets: Vec<f64> = positive.iter().map(|&p| if p { hi } else { lo }).collect();

    let objective = |a: f64, b: f64| -> f64 {
        decisions
            .iter()
            .zip(&targets)
            .map(|(&f, &t)| {
                let z = a * f + b;
                // −[t log p + (1−t) log(1−p)] with p = 1/(1+e^z)
                t * log1p_exp(z) + (1.0 - t) * log1p_exp(-z)
            })
            .sum()
    };

    let mut a = 0.0;
    let mut b = libm::log((n_neg + 1.0) / (n_pos + 1.0));
    let mut fval = objective(a, b);
    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (HESSIAN_SHIFT, HESSIAN_SHIFT, 0.0, 0.0, 0.0);
        for (&f, &t) in decisions.iter().zip(&targets) {
            let p = PlattParams { a, b }.probability(f);
            let q = 1.0 - p;
            let d2 = p * q;
            let d1 = t - p;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs().max(g2.abs()) <= GRAD_TOL {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut moved = false;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
    }
    Ok(PlattParams { a, b })
}

/// Calibrates `model` on `(x, y)`; returns a copy carrying the sigmoid.
pub fn platt_fit(model: &LinearSvmModel, x: &Matrix, y: &[i64]) -> Result<LinearSvmModel, ClassifyError> {
    let f = svm_decision(model, x)?;
    if y.len() != f.len() {
        return Err(ClassifyError::LengthMismatch { left: f.len(), right: y.len() });
    }
    let positive: Vec<bool> = y.iter().map(|&v| v == model.labels.positive).collect();
    let params = platt_fit_scores(&f, &positive)?;
    Ok(LinearSvmModel { platt: Some(params), ..model.clone() })
}
