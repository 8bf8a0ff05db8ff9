//! Kernel dimension reduction and linear classification.
//!
//! The crate is `no_std` (it needs `alloc`). It provides:
//!
//! * [`numerics`]: symmetric and generalized eigensolvers, Cholesky.
//! * [`kernels`]: RBF and linear kernels, Gram matrices and centering.
//! * [`hsic`]: link matrices and the empirical HSIC estimator.
//! * [`dimred`]: PCA, LDA, KPCA, supervised KPCA and KLDA projectors.
//! * [`classify`]: linear SVM, Platt scaling and evaluation metrics.
//! * [`synthdata`]: seeded generators for the simulation datasets.
//! * [`pipeline`]: train/test flows, grid search, LOPO and bootstrap
//!   ensembles.
//!
//! File formats, the command line and the parallel worker pool live in the
//! `kdr` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classify;
pub mod dimred;
pub mod hsic;
pub mod kernels;
pub mod numerics;
pub mod pipeline;
pub mod synthdata;
#[cfg(test)]
mod testutil;

pub use numerics::Matrix;
