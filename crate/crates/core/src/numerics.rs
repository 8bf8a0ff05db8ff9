//! Dense symmetric and generalized symmetric-definite eigensolvers.
//!
//! Every reduction method in this crate ends in one of two problems:
//! `S v = λ v` with `S` symmetric, or `A v = λ B v` with `A` symmetric and
//! `B` symmetric positive definite (after an optional ridge). The second is
//! reduced to the first by Cholesky whitening.
//!
//! Eigenpairs are always ordered by *signed* eigenvalue, largest first.
//! Kernel matrices built from an exponent with the "wrong" sign are
//! indefinite, and the signed ordering keeps the behaviour well defined for
//! those.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Dense, column-major real matrix used throughout the crate.
pub type Matrix = DMatrix<f64>;

/// Relative asymmetry accepted by [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Ridge values tried, in order, when a generalized problem has a singular
/// right-hand matrix.
pub const RIDGE_SCHEDULE: [f64; 8] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("matrix is not positive definite (pivot {pivot:e} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },
    #[error("eigensolver failed to converge")]
    ConvergenceFailure,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("requested {requested} eigenpairs from a dimension-{dim} problem")]
    InvalidCount { requested: usize, dim: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// A square matrix that is symmetric to within [`SYMMETRY_TOL`] relative to
/// its largest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self, NumericsError> {
        if m.nrows() != m.ncols() {
            return Err(NumericsError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite);
        }
        let scale = m.amax();
        let n = m.nrows();
        let mut asym = 0.0f64;
        for j in 0..n {
            for i in (j + 1)..n {
                asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if asym > SYMMETRY_TOL * scale {
            return Err(NumericsError::NonSymmetric { asymmetry: asym });
        }
        Ok(Self(m))
    }

    /// Replaces `m` by `(m + mᵀ) / 2`, absorbing round-off from products
    /// that are symmetric in exact arithmetic.
    pub fn symmetrize(mut m: Matrix) -> Result<Self, NumericsError> {
        if m.nrows() != m.ncols() {
            return Err(NumericsError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self::new(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(Matrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Eigenpairs sorted by signed eigenvalue, descending. Column `j` of
/// `vectors` has unit Euclidean norm and pairs with `values[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of eigenvalues strictly above `rel_cutoff · values[0]`.
    /// Zero when the leading eigenvalue is not positive.
    pub fn count_above(&self, rel_cutoff: f64) -> usize {
        match self.values.first() {
            Some(&top) if top > 0.0 => self.values.iter().filter(|&&v| v > rel_cutoff * top).count(),
            _ => 0,
        }
    }
}

/// Solver tuning. Problems up to `dense_limit` are decomposed densely;
/// larger ones use a Lanczos iteration that extracts only the top pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub dense_limit: usize,
    /// Iteration cap for the dense implicit QR sweeps (0 = unbounded).
    pub max_qr_iterations: usize,
    /// Largest Krylov basis the Lanczos path may build.
    pub max_krylov_dim: usize,
    /// Ritz residual target relative to `max(1, ‖S‖_F)`.
    pub tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { dense_limit: 2048, max_qr_iterations: 0, max_krylov_dim: 600, tol: 1e-10 }
    }
}

/// Top-`k` eigenpairs of a symmetric matrix.
pub fn sym_eig(s: &SymMatrix, k: usize) -> Result<EigenPairs, NumericsError> {
    sym_eig_with(s, k, &EigenOptions::default())
}

pub fn sym_eig_with(s: &SymMatrix, k: usize, opts: &EigenOptions) -> Result<EigenPairs, NumericsError> {
    let n = s.dim();
    if k == 0 || k > n {
        return Err(NumericsError::InvalidCount { requested: k, dim: n });
    }
    if n <= opts.dense_limit {
        dense_top_k(s.as_matrix(), k, opts)
    } else {
        let m = s.as_matrix();
        let norm = m.norm();
        lanczos_top_k(n, k, norm, opts, |x, y| y.gemv(1.0, m, x, 0.0))
    }
}

fn dense_top_k(m: &Matrix, k: usize, opts: &EigenOptions) -> Result<EigenPairs, NumericsError> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, opts.max_qr_iterations)
        .ok_or(NumericsError::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order.truncate(k);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Matrix::zeros(m.nrows(), k);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    normalize_columns(&mut vectors);
    Ok(EigenPairs { values, vectors })
}

/// Lanczos with full reorthogonalisation. `apply(x, y)` must write `S x`
/// into `y`. The start vector is a fixed pseudo-random draw so results are
/// reproducible.
pub fn lanczos_top_k<F>(
    n: usize,
    k: usize,
    op_norm: f64,
    opts: &EigenOptions,
    mut apply: F,
) -> Result<EigenPairs, NumericsError>
where
    F: FnMut(&DVector<f64>, &mut DVector<f64>),
{
    if k == 0 || k > n {
        return Err(NumericsError::InvalidCount { requested: k, dim: n });
    }
    let max_m = opts.max_krylov_dim.max(k + 1).min(n);
    let target = opts.tol * op_norm.max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b64_725f_6c61_6e63);

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(max_m);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_m);
    let mut beta: Vec<f64> = Vec::with_capacity(max_m);

    let mut q = random_unit(n, &mut rng);
    let mut w = DVector::zeros(n);
    let mut last_check = 0usize;
    loop {
        let j = basis.len();
        apply(&q, &mut w);
        let a = q.dot(&w);
        basis.push(q.clone());
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = v.dot(&w);
                w.axpy(-c, v, 1.0);
            }
        }
        let b = w.norm();
        let m = j + 1;
        let exhausted = b <= f64::EPSILON * op_norm.max(1.0) * 16.0;

        let want_check = m >= k && (m - last_check >= 8 || exhausted || m == max_m);
        if want_check {
            last_check = m;
            let (vals, svecs) = tridiagonal_eig(&alpha, &beta);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| vals[y].total_cmp(&vals[x]));
            // Ritz residual for pair i is |b · s_{m-1,i}|.
            let converged = order[..k].iter().all(|&i| (b * svecs[(m - 1, i)]).abs() <= target);
            if converged || (exhausted && m == n) {
                let mut vectors = Matrix::zeros(n, k);
                for (c, &i) in order[..k].iter().enumerate() {
                    let mut col = DVector::zeros(n);
                    for (r, v) in basis.iter().enumerate() {
                        col.axpy(svecs[(r, i)], v, 1.0);
                    }
                    vectors.set_column(c, &col);
                }
                normalize_columns(&mut vectors);
                let values = order[..k].iter().map(|&i| vals[i]).collect();
                return Ok(EigenPairs { values, vectors });
            }
            if m == max_m {
                return Err(NumericsError::ConvergenceFailure);
            }
        }

        if exhausted {
            // Invariant subspace found before convergence of the wanted
            // pairs: continue from a fresh direction orthogonal to it.
            let mut r = random_unit(n, &mut rng);
            for _ in 0..2 {
                for v in &basis {
                    let c = v.dot(&r);
                    r.axpy(-c, v, 1.0);
                }
            }
            let rn = r.norm();
            if rn == 0.0 {
                return Err(NumericsError::ConvergenceFailure);
            }
            beta.push(0.0);
            q = r / rn;
        } else {
            beta.push(b);
            q = &w / b;
        }
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let v: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
    let norm = v.norm();
    v / norm
}

fn tridiagonal_eig(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, Matrix) {
    let m = alpha.len();
    let mut t = Matrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i + 1, i)] = beta[i];
            t[(i, i + 1)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Scales every column to unit norm and fixes its sign so the entry of
/// largest magnitude is positive. Zero columns are left untouched.
pub fn normalize_columns(m: &mut Matrix) {
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        if norm == 0.0 {
            continue;
        }
        col /= norm;
        let mut best = 0usize;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Lower-triangular `L` with `L Lᵀ = S`. Fails on the first pivot that is
/// not strictly positive.
pub fn cholesky(s: &SymMatrix) -> Result<Matrix, NumericsError> {
    cholesky_shifted(s.as_matrix(), 0.0)
}

/// Cholesky factor of `m + shift·I`, reading only the lower triangle.
fn cholesky_shifted(m: &Matrix, shift: f64) -> Result<Matrix, NumericsError> {
    let n = m.nrows();
    let mut l = m.lower_triangle();
    for j in 0..n {
        l[(j, j)] += shift;
    }
    // left-looking, column by column; columns are contiguous in memory
    for j in 0..n {
        for k in 0..j {
            let ljk = l[(j, k)];
            if ljk != 0.0 {
                let (left, mut right) = l.columns_range_pair_mut(k, j);
                let src = left.rows_range(j..n);
                right.rows_range_mut(j..n).axpy(-ljk, &src, 1.0);
            }
        }
        let pivot = l[(j, j)];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(NumericsError::NotPositiveDefinite { column: j, pivot });
        }
        let d = libm::sqrt(pivot);
        l[(j, j)] = d;
        for i in (j + 1)..n {
            l[(i, j)] /= d;
        }
    }
    Ok(l)
}

/// Top-`k` pairs of `A v = λ (B + ridge·I) v`.
///
/// `B + ridge·I = L Lᵀ`, then `L⁻¹ A L⁻ᵀ u = λ u` is solved as a standard
/// symmetric problem and mapped back with `v = L⁻ᵀ u`. Returned vectors are
/// rescaled to unit Euclidean norm.
pub fn gen_eig(a: &SymMatrix, b: &SymMatrix, k: usize, ridge: f64) -> Result<EigenPairs, NumericsError> {
    gen_eig_with(a, b, k, ridge, &EigenOptions::default())
}

pub fn gen_eig_with(
    a: &SymMatrix,
    b: &SymMatrix,
    k: usize,
    ridge: f64,
    opts: &EigenOptions,
) -> Result<EigenPairs, NumericsError> {
    let n = a.dim();
    if b.dim() != n {
        return Err(NumericsError::DimensionMismatch { left: n, right: b.dim() });
    }
    if k == 0 || k > n {
        return Err(NumericsError::InvalidCount { requested: k, dim: n });
    }
    let l = cholesky_shifted(b.as_matrix(), ridge)?;
    let half =
        l.solve_lower_triangular(a.as_matrix()).ok_or(NumericsError::NotPositiveDefinite { column: 0, pivot: 0.0 })?;
    let whitened = l
        .solve_lower_triangular(&half.transpose())
        .ok_or(NumericsError::NotPositiveDefinite { column: 0, pivot: 0.0 })?;
    let whitened = SymMatrix::symmetrize(whitened)?;
    let pairs = sym_eig_with(&whitened, k, opts)?;
    let mut vectors = l
        .tr_solve_lower_triangular(&pairs.vectors)
        .ok_or(NumericsError::NotPositiveDefinite { column: 0, pivot: 0.0 })?;
    normalize_columns(&mut vectors);
    Ok(EigenPairs { values: pairs.values, vectors })
}

/// Generalized problem with a low-rank left-hand side given as a factor:
/// `(F Fᵀ) v = λ (B + ridge·I) v` with `F` of size `n×r`.
///
/// With `G = L⁻¹ F` the nonzero spectrum of the whitened operator `G Gᵀ`
/// equals that of the small `r×r` matrix `Gᵀ G`, so only that is
/// decomposed. At most `min(k, r)` pairs are returned: the remaining
/// eigenvalues are exactly zero and their eigenvectors are not determined.
/// Pairs whose eigenvalue is not positive have no well-defined eigenvector
/// through this route and are also omitted.
pub fn gen_eig_factored(factor: &Matrix, b: &SymMatrix, k: usize, ridge: f64) -> Result<EigenPairs, NumericsError> {
    let n = factor.nrows();
    if b.dim() != n {
        return Err(NumericsError::DimensionMismatch { left: n, right: b.dim() });
    }
    if k == 0 || k > n {
        return Err(NumericsError::InvalidCount { requested: k, dim: n });
    }
    let l = cholesky_shifted(b.as_matrix(), ridge)?;
    let g = l.solve_lower_triangular(factor).ok_or(NumericsError::NotPositiveDefinite { column: 0, pivot: 0.0 })?;
    let small = SymMatrix::symmetrize(g.transpose() * &g)?;
    let r = small.dim();
    if r == 0 {
        return Ok(EigenPairs { values: Vec::new(), vectors: Matrix::zeros(n, 0) });
    }
    let pairs = dense_top_k(small.as_matrix(), r, &EigenOptions::default())?;
    let keep = pairs.values.iter().take(k).take_while(|&&v| v > 0.0).count();
    let mut u = Matrix::zeros(n, keep);
    for j in 0..keep {
        let col = &g * pairs.vectors.column(j);
        u.set_column(j, &(col / libm::sqrt(pairs.values[j])));
    }
    let mut vectors =
        l.tr_solve_lower_triangular(&u).ok_or(NumericsError::NotPositiveDefinite { column: 0, pivot: 0.0 })?;
    normalize_columns(&mut vectors);
    Ok(EigenPairs { values: pairs.values[..keep].to_vec(), vectors })
}

/// Runs `solve(ridge)` over [`RIDGE_SCHEDULE`], moving to the next ridge
/// whenever the solve reports [`NumericsError::NotPositiveDefinite`].
/// Returns the pairs together with the ridge that succeeded.
pub fn with_ridge_escalation<F>(mut solve: F) -> Result<(EigenPairs, f64), NumericsError>
where
    F: FnMut(f64) -> Result<EigenPairs, NumericsError>,
{
    let mut last = NumericsError::NotPositiveDefinite { column: 0, pivot: 0.0 };
    for &ridge in RIDGE_SCHEDULE.iter() {
        match solve(ridge) {
            Ok(p) => return Ok((p, ridge)),
            Err(e @ NumericsError::NotPositiveDefinite { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// `‖S v − λ v‖₂`.
pub fn sym_residual(s: &Matrix, value: f64, v: &DVector<f64>) -> f64 {
    let mut r = s * v;
    r.axpy(-value, v, 1.0);
    r.norm()
}

/// `‖A v − λ (B + ridge·I) v‖₂`.
pub fn gen_residual(a: &Matrix, b: &Matrix, ridge: f64, value: f64, v: &DVector<f64>) -> f64 {
    let mut bv = b * v;
    bv.axpy(ridge, v, 1.0);
    let mut r = a * v;
    r.axpy(-value, &bv, 1.0);
    r.norm()
}

/// Normwise backward error of an approximate generalized eigenpair:
/// `‖A v − λ B̃ v‖ / ((‖A‖_F + |λ| ‖B̃‖_F) ‖v‖)` with `B̃ = B + ridge·I`.
pub fn gen_relative_residual(a: &Matrix, b: &Matrix, ridge: f64, value: f64, v: &DVector<f64>) -> f64 {
    let mut bt = b.clone();
    for i in 0..bt.nrows() {
        bt[(i, i)] += ridge;
    }
    let denom = (a.norm() + value.abs() * bt.norm()) * v.norm();
    if denom == 0.0 {
        return 0.0;
    }
    gen_residual(a, &bt, 0.0, value, v) / denom
}

/// `‖S v − λ v‖ / ((‖S‖_F + |λ|) ‖v‖)`.
pub fn sym_relative_residual(s: &Matrix, value: f64, v: &DVector<f64>) -> f64 {
    let denom = (s.norm() + value.abs()) * v.norm();
    if denom == 0.0 {
        return 0.0;
    }
    sym_residual(s, value, v) / denom
}

/// Explicit `n×n` centering matrix `I − (1/n) 1 1ᵀ`.
pub fn centering_matrix(n: usize) -> Matrix {
    let mut h = Matrix::from_element(n, n, -1.0 / n as f64);
    for i in 0..n {
        h[(i, i)] += 1.0;
    }
    h
}

/// Serde adapter storing a [`Matrix`] as `{rows, cols, data}` with `data` in
/// row-major order.
#[cfg(feature = "serde")]
pub mod serde_matrix {
    use super::Matrix;
    use alloc::vec::Vec;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    }

    fn to_repr(m: &Matrix) -> Repr {
        Repr { rows: m.nrows(), cols: m.ncols(), data: m.transpose().as_slice().to_vec() }
    }

    fn from_repr<E: Error>(r: Repr) -> Result<Matrix, E> {
        if r.rows.checked_mul(r.cols) != Some(r.data.len()) {
            return Err(E::custom("matrix data length does not match rows*cols"));
        }
        Ok(Matrix::from_row_slice(r.rows, r.cols, &r.data))
    }

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        to_repr(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Option<Matrix>, s: S) -> Result<S::Ok, S::Error> {
            m.as_ref().map(to_repr).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Matrix>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
        }
    }
}
