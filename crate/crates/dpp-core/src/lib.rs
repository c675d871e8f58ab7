//! Finite L-ensemble determinantal point processes: kernel construction,
//! subset probabilities, exact sampling and MAP inference through the
//! continuous multilinear relaxation.
//!
//! Symmetric kernels sample through the spectral two-phase scheme; general
//! P0 kernels (which need not admit an orthonormal eigenbasis) go through
//! the sequential conditional sampler.

mod kernel;
mod map;
mod sampling;

pub use kernel::{build_kernel, marginal_kernel, subset_log_prob, KernelEnsemble, P0Status, Subset};
pub use kernel::log_normalizer;
pub use map::{
    enumerate_map, local_opt, map_infer, multilinear_gradient, multilinear_value, subset_logdet,
    RelaxedPoint,
};
pub use sampling::{sample_sequential, sample_spectral};

#[derive(Debug, thiserror::Error)]
pub enum DppError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("kernel is asymmetric (max asymmetry {asym:.3e}); use sample_sequential")]
    Asymmetric { asym: f64 },
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("ground set size {n} exceeds enumeration guard {max}")]
    Guard { n: usize, max: usize },
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
}

pub type Result<T> = std::result::Result<T, DppError>;
