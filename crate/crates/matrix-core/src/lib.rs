//! Dense complex linear algebra for the 2x2 and 4x4 operators of a
//! qubit working medium coupled to a qubit lubricant.
//!
//! Matrices are stored row-major. Composite indices follow the Kronecker
//! convention: for `a ⊗ b` with `b` of dimension `d`, row `i*d + k`
//! pairs row `i` of `a` with row `k` of `b`.

mod composite;
mod density;
mod eigen;
mod operator;

pub use composite::{partial_trace, partial_transpose, tensor_product, Subsystem};
pub use density::{DensityOperator, HERMITICITY_TOL, POSITIVITY_SLACK, TRACE_TOL};
pub use eigen::{hermitian_eigendecomposition, hermitian_exponential, norms, Eigen, Norms};
pub use operator::OperatorMatrix;

pub use num_complex::Complex64 as C64;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry count {found} does not fill a {dim}x{dim} matrix")]
    BadShape { dim: usize, found: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("operator is not Hermitian (max |m - m^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("trace {trace:e} differs from 1")]
    BadTrace { trace: f64 },
    #[error("minimum eigenvalue {min_eigenvalue:e} below positivity slack")]
    NotPositive { min_eigenvalue: f64 },
}

pub type Result<T> = std::result::Result<T, MatrixError>;

/// Scale-aware tolerance: `tol * max(1, largest |entry|)`.
pub(crate) fn scaled_tol(m: &OperatorMatrix, tol: f64) -> f64 {
    tol * m.max_abs().max(1.0)
}
