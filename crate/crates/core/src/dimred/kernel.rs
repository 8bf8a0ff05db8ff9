use alloc::vec::Vec;

use super::{
    check_labels, clamp_dim, class_groups, constant_warning, escalation_error, output_offsets, standardize_fit,
    DimRedError, DrSpec, FitReport, FitWarning, Projector, KPCA_CUTOFF, RANK_CUTOFF,
};
use crate::hsic::{indicator_factor, link_matrix, skpca_objective_matrix, LinkSpec};
use crate::kernels::{center_gram, gram, CenteringStats, KernelSpec};
use crate::numerics::{
    gen_eig, gen_eig_factored, gen_relative_residual, sym_eig, sym_relative_residual, with_ridge_escalation,
    EigenPairs, Matrix, SymMatrix,
};

/// Kernel PCA on the double-centered Gram matrix.
pub fn fit_kpca(x: &Matrix, kernel: &KernelSpec, d: usize) -> Result<Projector, DimRedError> {
    let mut warnings = Vec::new();
    let (standardizer, z) = standardize_fit(x)?;
    constant_warning(&standardizer, &mut warnings);
    let n = z.nrows();
    let k = clamp_dim(d, n, &mut warnings)?;
    let gm = gram(kernel, &z);
    let centering = gm.centering_stats();
    let kc = center_gram(&gm)?;
    drop(gm);
    let pairs = sym_eig(kc.entries(), k)?;

    let top = pairs.values[0];
    let retained = if top > 0.0 { pairs.values.iter().take_while(|&&v| v > KPCA_CUTOFF * top).count() } else { 0 };
    if retained < k {
        warnings.push(FitWarning::DimensionReduced { requested: k, retained });
    }
    let max_res = (0..retained)
        .map(|j| sym_relative_residual(kc.matrix(), pairs.values[j], &pairs.vectors.column(j).into_owned()))
        .fold(0.0, f64::max);
    let mut basis = pairs.vectors.columns(0, retained).into_owned();
    for (j, mut col) in basis.column_iter_mut().enumerate() {
        col /= libm::sqrt(pairs.values[j]);
    }
    let train_projections = kc.matrix() * &basis;
    Ok(Projector {
        spec: DrSpec::Kpca { kernel: *kernel, d },
        standardizer,
        basis,
        eigenvalues: pairs.values[..retained].to_vec(),
        train_x: Some(z),
        centering: Some(centering),
        train_projections,
        report: FitReport {
            requested_d: d,
            retained_d: retained,
            ridge: None,
            rank_cutoff: KPCA_CUTOFF,
            max_relative_residual: max_res,
            warnings,
        },
    })
}

/// Supervised KPCA: maximizes empirical HSIC through `A v = λ K v` with
/// `A = K H L H K`.
///
/// The indicator link factors as `L = F Fᵀ` (class indicators), so `A` is
/// passed as the factor `K H F`; this keeps its exact rank of at most
/// `C − 1`. The modified link has full rank and takes the dense route.
pub fn fit_skpca(
    x: &Matrix,
    y: &[i64],
    kernel: &KernelSpec,
    link: &LinkSpec,
    d: usize,
) -> Result<Projector, DimRedError> {
    check_labels(x, y)?;
    let mut warnings = Vec::new();
    let (standardizer, z) = standardize_fit(x)?;
    constant_warning(&standardizer, &mut warnings);
    let n = z.nrows();
    let k = clamp_dim(d, n, &mut warnings)?;
    let gm = gram(kernel, &z);
    let km = gm.matrix();

    let (pairs, ridge, a) = match link {
        LinkSpec::Indicator => {
            let mut f = indicator_factor(y);
            for mut col in f.column_iter_mut() {
                let mean = col.sum() / n as f64;
                col.add_scalar_mut(-mean);
            }
            let factor = km * f;
            let (pairs, ridge) =
                with_ridge_escalation(|r| gen_eig_factored(&factor, gm.entries(), k, r)).map_err(escalation_error)?;
            let a = &factor * factor.transpose();
            (pairs, ridge, a)
        }
        LinkSpec::Modified { .. } => {
            let l = link_matrix(link, y, Some(&z))?;
            let a = skpca_objective_matrix(&gm, &l)?;
            let (pairs, ridge) =
                with_ridge_escalation(|r| gen_eig(&a, gm.entries(), k, r)).map_err(escalation_error)?;
            (pairs, ridge, a.into_matrix())
        }
    };
    let (basis, values, max_res) = keep_usable(pairs, k, &a, km, ridge, &mut warnings);
    drop(a);
    let centering = gm.centering_stats();
    let train_projections = left_centered(km, &basis, &centering);
    Ok(Projector {
        spec: DrSpec::Skpca { kernel: *kernel, link: *link, d },
        standardizer,
        report: FitReport {
            requested_d: d,
            retained_d: values.len(),
            ridge: Some(ridge),
            rank_cutoff: RANK_CUTOFF,
            max_relative_residual: max_res,
            warnings,
        },
        basis,
        eigenvalues: values,
        train_x: Some(z),
        centering: Some(centering),
        train_projections,
    })
}

/// Kernel Fisher discriminant: `M u = λ N u` with
/// `M = Σ_c n_c (M_c − M̄)(M_c − M̄)ᵀ` and `N = Σ_c K_c H_{n_c} K_cᵀ`.
pub fn fit_klda(x: &Matrix, y: &[i64], kernel: &KernelSpec, d: usize) -> Result<Projector, DimRedError> {
    check_labels(x, y)?;
    let groups = class_groups(y)?;
    let mut warnings = Vec::new();
    let (standardizer, z) = standardize_fit(x)?;
    constant_warning(&standardizer, &mut warnings);
    let n = z.nrows();
    let k = clamp_dim(d, n, &mut warnings)?;
    let gm = gram(kernel, &z);
    let km = gm.matrix();
    let centering = gm.centering_stats();

    // M = D Dᵀ with D_c = √n_c (M_c − M̄); N = W Wᵀ where W holds each
    // class block of K with its within-class row means removed.
    let mut between = Matrix::zeros(n, groups.len());
    let mut w = Matrix::zeros(n, n);
    let mut col_out = 0usize;
    for (c, (_, idx)) in groups.iter().enumerate() {
        let nc = idx.len() as f64;
        for i in 0..n {
            let mean = idx.iter().map(|&h| km[(i, h)]).sum::<f64>() / nc;
            between[(i, c)] = libm::sqrt(nc) * (mean - centering.row_means[i]);
            for (t, &h) in idx.iter().enumerate() {
                w[(i, col_out + t)] = km[(i, h)] - mean;
            }
        }
        col_out += idx.len();
    }
    let within = SymMatrix::symmetrize(&w * w.transpose())?;
    drop(w);
    let (pairs, ridge) =
        with_ridge_escalation(|r| gen_eig_factored(&between, &within, k, r)).map_err(escalation_error)?;
    let m = &between * between.transpose();
    let (basis, values, max_res) = keep_usable(pairs, k, &m, within.as_matrix(), ridge, &mut warnings);
    let train_projections = left_centered(km, &basis, &centering);
    Ok(Projector {
        spec: DrSpec::Klda { kernel: *kernel, d },
        standardizer,
        report: FitReport {
            requested_d: d,
            retained_d: values.len(),
            ridge: Some(ridge),
            rank_cutoff: RANK_CUTOFF,
            max_relative_residual: max_res,
            warnings,
        },
        basis,
        eigenvalues: values,
        train_x: Some(z),
        centering: Some(centering),
        train_projections,
    })
}

/// Keeps the leading eigenpairs above the rank cutoff and reports the
/// largest backward error of `a v = λ (b + ridge·I) v` among them.
fn keep_usable(
    pairs: EigenPairs,
    k: usize,
    a: &Matrix,
    b: &Matrix,
    ridge: f64,
    warnings: &mut Vec<FitWarning>,
) -> (Matrix, Vec<f64>, f64) {
    let usable = pairs.count_above(RANK_CUTOFF).min(k);
    if usable < k {
        warnings.push(FitWarning::RankDeficient { requested: k, usable });
    }
    let basis = pairs.vectors.columns(0, usable).into_owned();
    let values = pairs.values[..usable].to_vec();
    let max_res = (0..usable)
        .map(|j| gen_relative_residual(a, b, ridge, values[j], &basis.column(j).into_owned()))
        .fold(0.0, f64::max);
    (basis, values, max_res)
}

/// `K v` with the mean training projection removed per component.
fn left_centered(k: &Matrix, basis: &Matrix, stats: &CenteringStats) -> Matrix {
    let mut out = k * basis;
    let offsets = output_offsets(stats, basis);
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col.add_scalar_mut(-offsets[j]);
    }
    out
}
