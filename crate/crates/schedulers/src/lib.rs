//! Baseline subset selectors for the link-scheduling problem: the iterative
//! GP solver (successive monomial approximation with a log-domain barrier
//! inner solver), exhaustive brute force, and independent thinning.

mod brute;
mod gp;
mod monomial;
mod thinning;

pub use brute::brute_force_schedule;
pub use gp::{gp_schedule, GpConfig, ScheduleResult};
pub use monomial::{monomial_params, monomial_validity};
pub use thinning::{estimate_pa, independent_thinning};

#[derive(Debug, thiserror::Error)]
pub enum SchedError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("ground set size {m} exceeds brute-force guard {max}")]
    Guard { m: usize, max: usize },
    #[error("inner solver failed to converge: {0}")]
    InnerSolver(String),
    #[error("outer loop did not converge in {iters} iterations (last delta {delta:.3e})")]
    OuterNonConvergence { iters: usize, delta: f64 },
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
}

pub type Result<T> = std::result::Result<T, SchedError>;
