//! Dense symmetric eigen-solvers, the PSD generalized eigenproblem used by the
//! inequality audits, and a sparse SPD solver for the condensed HDG system.
//!
//! Dense factorizations are delegated to `faer`; the Krylov cross-check and
//! the sparse envelope Cholesky are implemented here.

mod dense;
mod geneig;
mod sparse;

pub use dense::{sym_eig, SymEig, SymmetricDense};
pub use geneig::{gen_eig_max, gen_eig_max_dense, lanczos_max, GenEig, DEFAULT_NULL_TOL};
pub use sparse::{rcm_ordering, SolveInfo, SparseSymmetric, SpdFactor, TripletBuilder};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("{which} is indefinite: eigenvalue {eig:e} below -tol * {scale:e}")]
    Indefinite { which: &'static str, eig: f64, scale: f64 },
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotSpd { row: usize, pivot: f64 },
    #[error("eigen-decomposition failed to converge")]
    NoConvergence,
}
