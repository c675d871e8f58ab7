use rand::Rng;

use dpp_core::{map_infer, sample_sequential, sample_spectral, Subset};
use network_sim::NetworkInstance;

use crate::likelihood::build_model_kernel;
use crate::params::ModelParams;
use crate::Result;

/// Rounding threshold for MAP inference on the multilinear relaxation.
const MAP_ROUND_DELTA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferMode {
    Sample,
    Map,
}

/// Builds the family's kernel for the instance and routes to the matching
/// inference backend: spectral sampling for symmetric kernels, the
/// sequential sampler otherwise, or MAP via the multilinear relaxation.
pub fn infer<R: Rng>(
    inst: &NetworkInstance,
    params: &ModelParams,
    mode: InferMode,
    rng: &mut R,
) -> Result<Subset> {
    let kernel = build_model_kernel(inst, params)?;
    let subset = match mode {
        InferMode::Map => map_infer(&kernel, MAP_ROUND_DELTA)?,
        InferMode::Sample => {
            if kernel.is_symmetric() {
                sample_spectral(&kernel, rng)?
            } else {
                sample_sequential(&kernel, rng)?
            }
        }
    };
    Ok(subset)
}
