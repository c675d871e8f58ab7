//! Dense real linear algebra used across the workspace: row-major matrices,
//! partial-pivot LU (log-determinants, solves) and a symmetric eigensolver.
//!
//! All operations are pure functions of their inputs and safe to call from
//! multiple threads.

mod eig;
mod lu;
mod matrix;

pub use eig::{sym_eig, SymEigen};
pub use lu::{logdet_lu, solve, LuFactors};
pub use matrix::Matrix;

/// Relative pivot threshold below which a matrix is treated as singular.
pub const SINGULARITY_RTOL: f64 = 1e-14;

#[derive(Debug, thiserror::Error)]
pub enum NumericsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is numerically singular at pivot index {pivot}")]
    Singular { pivot: usize },
    #[error("matrix is not symmetric: max asymmetry {asym:.3e} exceeds tolerance {tol:.3e}")]
    NotSymmetric { asym: f64, tol: f64 },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

pub type Result<T> = std::result::Result<T, NumericsError>;
