use alloc::vec::Vec;

use super::{
    check_labels, clamp_dim, class_groups, constant_warning, escalation_error, standardize_fit, DimRedError, DrSpec,
    FitReport, FitWarning, Projector, RANK_CUTOFF,
};
use crate::numerics::{
    gen_eig_factored, gen_relative_residual, sym_eig, sym_relative_residual, with_ridge_escalation, Matrix, SymMatrix,
};

/// PCA on the standardized features: top eigenvectors of `ZᵀZ/(n−1)`.
pub fn fit_pca(x: &Matrix, d: usize) -> Result<Projector, DimRedError> {
    let mut warnings = Vec::new();
    let (standardizer, z) = standardize_fit(x)?;
    constant_warning(&standardizer, &mut warnings);
    let p = z.ncols();
    let k = clamp_dim(d, p, &mut warnings)?;
    let cov = SymMatrix::symmetrize(z.transpose() * &z / (z.nrows() - 1) as f64)?;
    let pairs = sym_eig(&cov, k)?;
    let max_res = (0..k)
        .map(|j| sym_relative_residual(cov.as_matrix(), pairs.values[j], &pairs.vectors.column(j).into_owned()))
        .fold(0.0, f64::max);
    let train_projections = &z * &pairs.vectors;
    Ok(Projector {
        spec: DrSpec::Pca { d },
        standardizer,
        basis: pairs.vectors,
        eigenvalues: pairs.values,
        train_x: None,
        centering: None,
        train_projections,
        report: FitReport {
            requested_d: d,
            retained_d: k,
            ridge: None,
            rank_cutoff: RANK_CUTOFF,
            max_relative_residual: max_res,
            warnings,
        },
    })
}

/// Fisher LDA: `S_B v = λ S_W v` on standardized features, with
/// `S_B = Σ_c n_c (x̄_c − x̄)(x̄_c − x̄)ᵀ` passed in factored form.
pub fn fit_lda(x: &Matrix, y: &[i64], d: usize) -> Result<Projector, DimRedError> {
    check_labels(x, y)?;
    let groups = class_groups(y)?;
    let mut warnings = Vec::new();
    let (standardizer, z) = standardize_fit(x)?;
    constant_warning(&standardizer, &mut warnings);
    let (n, p) = z.shape();
    let k = clamp_dim(d, (groups.len() - 1).min(p), &mut warnings)?;

    let grand: Vec<f64> = z.column_iter().map(|c| c.sum() / n as f64).collect();
    let mut between = Matrix::zeros(p, groups.len());
    let mut centered = z.clone();
    for (c, (_, idx)) in groups.iter().enumerate() {
        let nc = idx.len() as f64;
        for j in 0..p {
            let mean = idx.iter().map(|&i| z[(i, j)]).sum::<f64>() / nc;
            between[(j, c)] = libm::sqrt(nc) * (mean - grand[j]);
            for &i in idx {
                centered[(i, j)] -= mean;
            }
        }
    }
    let within = SymMatrix::symmetrize(centered.transpose() * &centered)?;
    let (pairs, ridge) =
        with_ridge_escalation(|r| gen_eig_factored(&between, &within, k, r)).map_err(escalation_error)?;

    let usable = pairs.count_above(RANK_CUTOFF).min(k);
    if usable < k {
        warnings.push(FitWarning::RankDeficient { requested: k, usable });
    }
    let basis = pairs.vectors.columns(0, usable).into_owned();
    let values = pairs.values[..usable].to_vec();
    let sb = &between * between.transpose();
    let max_res = (0..usable)
        .map(|j| gen_relative_residual(&sb, within.as_matrix(), ridge, values[j], &basis.column(j).into_owned()))
        .fold(0.0, f64::max);
    let train_projections = &z * &basis;
    Ok(Projector {
        spec: DrSpec::Lda { d },
        standardizer,
        basis,
        eigenvalues: values,
        train_x: None,
        centering: None,
        train_projections,
        report: FitReport {
            requested_d: d,
            retained_d: usable,
            ridge: Some(ridge),
            rank_cutoff: RANK_CUTOFF,
            max_relative_residual: max_res,
            warnings,
        },
    })
}
