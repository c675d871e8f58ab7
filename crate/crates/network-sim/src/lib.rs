//! Network scenario generators and link-level evaluation: a 2D Poisson
//! ad hoc network and a 3D hexagonal drone-cellular network, with SINR and
//! sum-rate evaluation for any active-link subset.

mod adhoc;
mod antenna;
mod dronecell;
mod instance;

pub use adhoc::{gen_adhoc, AdHocConfig, RxPlacement};
pub use antenna::{antenna_gain_db, ELEMENT_PEAK_GAIN_DBI};
pub use dronecell::{gen_dronecell, DroneCellConfig};
pub use instance::{sinr, sum_rate, NetworkInstance, ScenarioTag};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error(transparent)]
    Dpp(#[from] dpp_core::DppError),
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
