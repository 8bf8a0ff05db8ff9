use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClassifyError, PlattParams};
use crate::dimred::standardize_fit;
use crate::hsic::distinct_sorted;
use crate::numerics::{sym_eig, Matrix, SymMatrix};

/// Solver settings. `tol` bounds the largest projected-gradient (KKT)
/// violation accepted at convergence. With `scale` set, [`svm_fit`] trains
/// on z-scored features and folds the scaling back into `w` and `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SvmParams {
    pub cost: f64,
    pub tol: f64,
    pub max_updates: u64,
    pub seed: u64,
    pub scale: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { cost: 1.0, tol: 1e-6, max_updates: 10_000_000, seed: 0, scale: true }
    }
}

impl SvmParams {
    pub fn with_cost(cost: f64) -> Self {
        Self { cost, ..Self::default() }
    }
}

/// Maps the two class labels onto `{−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabelMap {
    pub negative: i64,
    pub positive: i64,
}

impl LabelMap {
    pub fn sign(&self, label: i64) -> f64 {
        if label == self.positive {
            1.0
        } else {
            -1.0
        }
    }

    /// `sign(0)` resolves to the positive label.
    pub fn label(&self, decision: f64) -> i64 {
        if decision >= 0.0 {
            self.positive
        } else {
            self.negative
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearSvmModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub cost: f64,
    pub labels: LabelMap,
    pub platt: Option<PlattParams>,
}

impl LinearSvmModel {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn decision_row(&self, row: &[f64]) -> f64 {
        self.w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>() + self.b
    }

    /// Platt probability of the positive class, if calibrated.
    pub fn probability(&self, decision: f64) -> Option<f64> {
        self.platt.map(|p| p.probability(decision))
    }
}

/// Raw solver output on `±1` targets. `w_aug` carries the bias last.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmSolution {
    pub w_aug: Vec<f64>,
    pub alpha: Vec<f64>,
    pub updates: u64,
    /// Largest projected-gradient violation at the returned point.
    pub max_violation: f64,
}

fn check_params(params: &SvmParams) -> Result<(), ClassifyError> {
    if !(params.cost > 0.0 && params.cost.is_finite()) {
        return Err(ClassifyError::InvalidParameter { name: "cost", value: params.cost });
    }
    if !(params.tol > 0.0 && params.tol.is_finite()) {
        return Err(ClassifyError::InvalidParameter { name: "tol", value: params.tol });
    }
    Ok(())
}

fn augmented_rows(x: &Matrix) -> Vec<Vec<f64>> {
    x.row_iter()
        .map(|r| {
            let mut v: Vec<f64> = r.iter().copied().collect();
            v.push(1.0);
            v
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn projected_gradient(g: f64, alpha: f64, cost: f64) -> f64 {
    if alpha <= 0.0 {
        g.min(0.0)
    } else if alpha >= cost {
        g.max(0.0)
    } else {
        g
    }
}

/// Dual coordinate descent for the L1-loss SVM with the bias folded into
/// the weights through a constant feature:
///
/// `min ½ αᵀQα − Σα` over `0 ≤ α ≤ C`, `Q_ij = s_i s_j (x_i·x_j + 1)`.
///
/// Coordinates are visited in a fresh seeded permutation each epoch.
pub fn svm_train(x: &Matrix, signs: &[f64], params: &SvmParams) -> Result<SvmSolution, ClassifyError> {
    check_params(params)?;
    let n = x.nrows();
    if signs.len() != n {
        return Err(ClassifyError::LengthMismatch { left: n, right: signs.len() });
    }
    let rows = augmented_rows(x);
    let dim = x.ncols() + 1;
    let qii: Vec<f64> = rows.iter().map(|r| dot(r, r)).collect();
    let c = params.cost;
    let mut alpha = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; dim];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut updates = 0u64;
    let mut epochs = 0u64;

    loop {
        order.shuffle(&mut rng);
        let mut epoch_max = 0.0f64;
        for &i in &order {
            let g = signs[i] * dot(&w, &rows[i]) - 1.0;
            let pg = projected_gradient(g, alpha[i], c);
            epoch_max = epoch_max.max(pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                let new = (old - g / qii[i]).clamp(0.0, c);
                let delta = (new - old) * signs[i];
                if delta != 0.0 {
                    for (wk, xk) in w.iter_mut().zip(&rows[i]) {
                        *wk += delta * xk;
                    }
                }
                alpha[i] = new;
            }
            updates += 1;
        }
        epochs += 1;
        if epoch_max <= params.tol {
            // Rebuild w from the duals to shed accumulated rounding, then
            // certify on the rebuilt point.
            w = weights(&rows, signs, &alpha, dim);
            let violation = kkt_violation(&rows, signs, &alpha, &w, c);
            if violation <= params.tol {
                return Ok(SvmSolution { w_aug: w, alpha, updates, max_violation: violation });
            }
        } else if epochs % POLISH_EVERY == 0 {
            match polish(&rows, signs, &alpha, c, params.tol) {
                Polish::Done(pa, pw, violation) => {
                    return Ok(SvmSolution { w_aug: pw, alpha: pa, updates, max_violation: violation });
                }
                Polish::Improved(pa) => {
                    alpha = pa;
                    w = weights(&rows, signs, &alpha, dim);
                }
                Polish::Skipped => {}
            }
        }
        if updates >= params.max_updates {
            let violation = kkt_violation(&rows, signs, &alpha, &w, c);
            return Err(ClassifyError::NonConvergence { updates, violation });
        }
    }
}

/// Epochs between attempts to finish the solve on the current active set.
const POLISH_EVERY: u64 = 20;

fn weights(rows: &[Vec<f64>], signs: &[f64], alpha: &[f64], dim: usize) -> Vec<f64> {
    let mut w = alloc::vec![0.0; dim];
    for i in 0..rows.len() {
        if alpha[i] != 0.0 {
            for (wk, xk) in w.iter_mut().zip(&rows[i]) {
                *wk += alpha[i] * signs[i] * xk;
            }
        }
    }
    w
}

/// Largest free set the finishing step will take on, relative to the
/// feature dimension.
const POLISH_SLACK: usize = 8;

enum Polish {
    Done(Vec<f64>, Vec<f64>, f64),
    Improved(Vec<f64>),
    Skipped,
}

/// Active-set iterations per finishing attempt.
const POLISH_STEPS: usize = 2000;

/// Active-set finish for when coordinate descent crawls near the optimum.
///
/// If more than `dim + POLISH_SLACK` duals are free, only those with
/// margins closest to one stay free; the rest are snapped to the bound
/// their margin points to. Then a primal active-set method on the box:
///
/// - with the bound duals fixed, the free block minimizes exactly by
///   solving `Q_FF α_F = 1 − Q_FB α_B`, and a step that leaves the box is
///   cut at the first bound, which fixes that dual;
/// - `Q` has rank at most `dim`, so when `Q_FF` is singular the objective
///   is linear along its null space and the step follows that direction to
///   the box;
/// - at a minimizer of the current face the bound dual with the largest
///   KKT violation is released.
///
/// A certified point ends the solve. Otherwise the result goes back to
/// coordinate descent if it lowers the dual objective.
fn polish(rows: &[Vec<f64>], signs: &[f64], alpha: &[f64], c: f64, tol: f64) -> Polish {
    let n = rows.len();
    let dim = rows[0].len();
    let limit = dim + POLISH_SLACK;
    let start = objective(&weights(rows, signs, alpha, dim), alpha);
    let mut alpha = alpha.to_vec();
    let mut free: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0 && alpha[i] < c).collect();
    if free.len() > limit {
        let w = weights(rows, signs, &alpha, dim);
        let margin = |i: usize| signs[i] * dot(&w, &rows[i]);
        free.sort_by(|&a, &b| (margin(a) - 1.0).abs().total_cmp(&(margin(b) - 1.0).abs()).then(a.cmp(&b)));
        for &i in &free[limit..] {
            alpha[i] = if margin(i) > 1.0 { 0.0 } else { c };
        }
        free.truncate(limit);
    }
    let mut released = None;
    for _ in 0..POLISH_STEPS {
        if !free.is_empty() {
            let Some((step, hit)) = face_step(rows, signs, &mut alpha, &free, c) else { break };
            if let Some(i) = hit {
                if step == 0.0 && released == Some(i) {
                    break;
                }
                free.retain(|&j| j != i);
                continue;
            }
        }
        let w = weights(rows, signs, &alpha, dim);
        let mut worst = (tol, None);
        for i in 0..n {
            if free.contains(&i) {
                continue;
            }
            let g = signs[i] * dot(&w, &rows[i]) - 1.0;
            let v = if alpha[i] <= 0.0 { -g } else { g };
            if v > worst.0 {
                worst = (v, Some(i));
            }
        }
        match worst.1 {
            Some(i) => {
                free.push(i);
                released = Some(i);
            }
            None => break,
        }
    }
    let w = weights(rows, signs, &alpha, dim);
    let violation = kkt_violation(rows, signs, &alpha, &w, c);
    if violation <= tol {
        Polish::Done(alpha, w, violation)
    } else if objective(&w, &alpha) < start {
        Polish::Improved(alpha)
    } else {
        Polish::Skipped
    }
}

/// One step toward the minimizer over `free` with the other duals fixed.
/// Returns the step length and the dual that reached a bound, if any;
/// `None` if a linear solve failed.
fn face_step(
    rows: &[Vec<f64>],
    signs: &[f64],
    alpha: &mut [f64],
    free: &[usize],
    c: f64,
) -> Option<(f64, Option<usize>)> {
    let dim = rows[0].len();
    let m = free.len();
    let q = Matrix::from_fn(m, m, |a, b| signs[free[a]] * signs[free[b]] * dot(&rows[free[a]], &rows[free[b]]));
    let sym = SymMatrix::symmetrize(q.clone()).ok()?;
    let eig = sym_eig(&sym, m).ok()?;
    let top = eig.values[0].abs().max(1.0);
    let direction: Vec<f64> = if eig.values[m - 1] <= 1e-12 * top {
        let v = eig.vectors.column(m - 1);
        let sign = if v.sum() >= 0.0 { 1.0 } else { -1.0 };
        v.iter().map(|x| sign * x * 1e12).collect()
    } else {
        let mut bound = alpha.to_vec();
        for &i in free {
            bound[i] = 0.0;
        }
        let u = weights(rows, signs, &bound, dim);
        let rhs = nalgebra::DVector::from_fn(m, |a, _| 1.0 - signs[free[a]] * dot(&u, &rows[free[a]]));
        let sol = q.lu().solve(&rhs)?;
        (0..m).map(|a| sol[a] - alpha[free[a]]).collect()
    };
    // Largest step in [0, 1] keeping the free block inside the box.
    let mut step = 1.0f64;
    let mut hit = None;
    for (a, &i) in free.iter().enumerate() {
        let d = direction[a];
        let room = if d > 0.0 {
            (c - alpha[i]) / d
        } else if d < 0.0 {
            -alpha[i] / d
        } else {
            f64::INFINITY
        };
        if room < step {
            step = room.max(0.0);
            hit = Some((i, d > 0.0));
        }
    }
    for (a, &i) in free.iter().enumerate() {
        alpha[i] = (alpha[i] + step * direction[a]).clamp(0.0, c);
    }
    if let Some((i, up)) = hit {
        alpha[i] = if up { c } else { 0.0 };
    }
    Some((step, hit.map(|(i, _)| i)))
}

fn objective(w: &[f64], alpha: &[f64]) -> f64 {
    0.5 * dot(w, w) - alpha.iter().sum::<f64>()
}

fn kkt_violation(rows: &[Vec<f64>], signs: &[f64], alpha: &[f64], w: &[f64], c: f64) -> f64 {
    rows.iter()
        .zip(signs)
        .zip(alpha)
        .map(|((r, &s), &a)| projected_gradient(s * dot(w, r) - 1.0, a, c).abs())
        .fold(0.0, f64::max)
}

/// `½ αᵀQα − Σα` for the augmented dual.
pub fn dual_objective(x: &Matrix, signs: &[f64], alpha: &[f64]) -> f64 {
    let rows = augmented_rows(x);
    let w = weights(&rows, signs, alpha, x.ncols() + 1);
    objective(&w, alpha)
}

fn check_fit_input(x: &Matrix, y: &[i64]) -> Result<Vec<i64>, ClassifyError> {
    if y.len() != x.nrows() {
        return Err(ClassifyError::LengthMismatch { left: x.nrows(), right: y.len() });
    }
    if x.nrows() < 2 {
        return Err(ClassifyError::TooFewSamples { found: x.nrows() });
    }
    let classes = distinct_sorted(y);
    if classes.len() < 2 {
        return Err(ClassifyError::SingleClass);
    }
    Ok(classes)
}

/// Fits a binary linear SVM. The larger label is the positive class.
pub fn svm_fit(x: &Matrix, y: &[i64], params: &SvmParams) -> Result<LinearSvmModel, ClassifyError> {
    let classes = check_fit_input(x, y)?;
    if classes.len() > 2 {
        return Err(ClassifyError::TooManyClasses { found: classes.len() });
    }
    let labels = LabelMap { negative: classes[0], positive: classes[1] };
    let signs: Vec<f64> = y.iter().map(|&v| labels.sign(v)).collect();
    let p = x.ncols();
    let (w, b) = if params.scale {
        let (st, z) = standardize_fit(x).map_err(|_| ClassifyError::TooFewSamples { found: x.nrows() })?;
        let sol = svm_train(&z, &signs, params)?;
        let w: Vec<f64> = (0..p).map(|j| sol.w_aug[j] / st.stds[j]).collect();
        let shift: f64 = (0..p).filter(|&j| !st.constant[j]).map(|j| w[j] * st.means[j]).sum();
        (w, sol.w_aug[p] - shift)
    } else {
        let sol = svm_train(x, &signs, params)?;
        (sol.w_aug[..p].to_vec(), sol.w_aug[p])
    };
    Ok(LinearSvmModel { w, b, cost: params.cost, labels, platt: None })
}

fn check_width(expected: usize, x: &Matrix) -> Result<(), ClassifyError> {
    if x.ncols() != expected {
        return Err(ClassifyError::DimensionMismatch { expected, found: x.ncols() });
    }
    Ok(())
}

pub fn svm_decision(model: &LinearSvmModel, x: &Matrix) -> Result<Vec<f64>, ClassifyError> {
    check_width(model.dim(), x)?;
    Ok(x.row_iter()
        .map(|r| {
            let row: Vec<f64> = r.iter().copied().collect();
            model.decision_row(&row)
        })
        .collect())
}

pub fn svm_predict(model: &LinearSvmModel, x: &Matrix) -> Result<Vec<i64>, ClassifyError> {
    Ok(svm_decision(model, x)?.into_iter().map(|f| model.labels.label(f)).collect())
}

/// One binary machine per class (class vs rest); prediction takes the
/// largest decision value, ties going to the larger label.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OvrSvmModel {
    pub classes: Vec<i64>,
    pub machines: Vec<LinearSvmModel>,
}

impl OvrSvmModel {
    pub fn fit(x: &Matrix, y: &[i64], params: &SvmParams) -> Result<Self, ClassifyError> {
        let classes = check_fit_input(x, y)?;
        let mut machines = Vec::with_capacity(classes.len());
        for &c in &classes {
            let yc: Vec<i64> = y.iter().map(|&v| (v == c) as i64).collect();
            machines.push(svm_fit(x, &yc, params)?);
        }
        Ok(Self { classes, machines })
    }

    pub fn dim(&self) -> usize {
        self.machines[0].dim()
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<i64>, ClassifyError> {
        check_width(self.dim(), x)?;
        let decisions: Vec<Vec<f64>> = self.machines.iter().map(|m| svm_decision(m, x)).collect::<Result<_, _>>()?;
        Ok((0..x.nrows())
            .map(|i| {
                let mut best = 0;
                for k in 1..self.classes.len() {
                    if decisions[k][i] >= decisions[best][i] {
                        best = k;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}

/// A binary SVM, or one-vs-rest when the training labels have more than
/// two classes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Classifier {
    Binary(LinearSvmModel),
    OneVsRest(OvrSvmModel),
}

impl Classifier {
    pub fn fit(x: &Matrix, y: &[i64], params: &SvmParams) -> Result<Self, ClassifyError> {
        let classes = check_fit_input(x, y)?;
        if classes.len() == 2 {
            svm_fit(x, y, params).map(Self::Binary)
        } else {
            OvrSvmModel::fit(x, y, params).map(Self::OneVsRest)
        }
    }

    pub fn classes(&self) -> Vec<i64> {
        match self {
            Self::Binary(m) => alloc::vec![m.labels.negative, m.labels.positive],
            Self::OneVsRest(m) => m.classes.clone(),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<i64>, ClassifyError> {
        match self {
            Self::Binary(m) => svm_predict(m, x),
            Self::OneVsRest(m) => m.predict(x),
        }
    }

    /// Positive-class scores for ROC analysis: Platt probabilities when
    /// calibrated, raw decision values otherwise. `None` for one-vs-rest.
    pub fn scores(&self, x: &Matrix) -> Result<Option<Vec<f64>>, ClassifyError> {
        match self {
            Self::Binary(m) => {
                let f = svm_decision(m, x)?;
                Ok(Some(match m.platt {
                    Some(p) => f.into_iter().map(|v| p.probability(v)).collect(),
                    None => f,
                }))
            }
            Self::OneVsRest(_) => Ok(None),
        }
    }
}
