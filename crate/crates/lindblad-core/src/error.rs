//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LindbladError {
    /// Input shapes or parameters are inconsistent.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A Hamiltonian failed the Hermiticity check.
    #[error("matrix is not Hermitian within {tol:e} (deviation {deviation:e})")]
    NotHermitian { deviation: f64, tol: f64 },

    /// Generic input validation failure (bad scenario parameters, malformed
    /// vectors, non-density inputs, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A right-hand side handed to the constrained inverse has a component
    /// in the kernel of the generator, so L[x] = y has no solution.
    #[error("input is not in the range of F: ||G[y]|| = {gnorm:e} exceeds {tol:e}")]
    NotInRangeOfF { gnorm: f64, tol: f64 },

    /// The zero eigenvalue looks defective or the kernel is numerically
    /// unusable (often a sign of an over-tight tolerance).
    #[error("numerically degenerate kernel: {0}")]
    DegenerateKernel(String),

    /// The perturbative engine hit an obstruction it cannot remove because
    /// the reduced generator is singular on the traceless subspace.
    #[error(
        "higher-order degeneracy at order {order}: obstruction norm {obstruction:e} \
         with singular reduced generator (residual {residual:e})"
    )]
    HigherOrderDegeneracy {
        order: usize,
        obstruction: f64,
        residual: f64,
    },

    /// The requested analysis does not apply to this structure
    /// (degenerate Hamiltonian, non-unique reduced kernel state, ...).
    #[error("unsupported structure: {0}")]
    Unsupported(String),

    /// LAPACK-level failure.
    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, LindbladError>;
