use dpp_core::Subset;
use numerics::Matrix;
use serde::{Deserialize, Serialize};

use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioTag {
    Adhoc,
    Dronecell,
}

/// A realized network: Tx/Rx geometry plus the full channel-gain matrix.
///
/// `gain[(j, i)]` is the linear channel gain from Tx `j` to Rx `i`; the
/// diagonal holds the serving-link gains.
#[derive(Debug, Clone)]
pub struct NetworkInstance {
    pub scenario: ScenarioTag,
    pub tx_pos: Vec<[f64; 3]>,
    pub rx_pos: Vec<[f64; 3]>,
    pub gain: Matrix,
    pub p_high_watts: f64,
    pub noise_watts: f64,
    pub seed: u64,
    pub config_echo: serde_json::Value,
    /// Number of regeneration retries taken (empty Poisson draws).
    pub retries: u32,
}

impl NetworkInstance {
    pub fn m(&self) -> usize {
        self.gain.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        if m < 1 || self.tx_pos.len() != m || self.rx_pos.len() != m || self.gain.cols() != m {
            return Err(SimError::Config("inconsistent instance shape".into()));
        }
        if self.gain.data().iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(SimError::Config("gain entries must be positive finite".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let wire = InstanceWire {
            schema_version: SCHEMA_VERSION,
            scenario_tag: self.scenario,
            m: self.m(),
            tx_pos: self.tx_pos.clone(),
            rx_pos: self.rx_pos.clone(),
            gain: (0..self.m()).map(|j| self.gain.row(j).to_vec()).collect(),
            p_high_watts: self.p_high_watts,
            noise_watts: self.noise_watts,
            seed: self.seed,
            retries: self.retries,
            config_echo: self.config_echo.clone(),
        };
        Ok(serde_json::to_string_pretty(&wire)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: InstanceWire = serde_json::from_str(text)?;
        let m = wire.m;
        let mut data = Vec::with_capacity(m * m);
        for row in &wire.gain {
            if row.len() != m {
                return Err(SimError::Config("gain matrix row length mismatch".into()));
            }
            data.extend_from_slice(row);
        }
        let gain = Matrix::from_rows(m, m, data)
            .map_err(|e| SimError::Config(format!("gain matrix: {e}")))?;
        let inst = NetworkInstance {
            scenario: wire.scenario_tag,
            tx_pos: wire.tx_pos,
            rx_pos: wire.rx_pos,
            gain,
            p_high_watts: wire.p_high_watts,
            noise_watts: wire.noise_watts,
            seed: wire.seed,
            config_echo: wire.config_echo,
            retries: wire.retries,
        };
        inst.validate()?;
        Ok(inst)
    }
}

const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct InstanceWire {
    schema_version: u32,
    scenario_tag: ScenarioTag,
    m: usize,
    tx_pos: Vec<[f64; 3]>,
    rx_pos: Vec<[f64; 3]>,
    gain: Vec<Vec<f64>>,
    p_high_watts: f64,
    noise_watts: f64,
    seed: u64,
    retries: u32,
    config_echo: serde_json::Value,
}

/// Per-link SINR with the given active set at the high power level; inactive
/// links get 0.
pub fn sinr(inst: &NetworkInstance, active: &Subset) -> Vec<f64> {
    let m = inst.m();
    let mut out = vec![0.0; m];
    for &i in active.indices() {
        let mut interference = 0.0;
        for &j in active.indices() {
            if j != i {
                interference += inst.p_high_watts * inst.gain[(j, i)];
            }
        }
        out[i] = inst.p_high_watts * inst.gain[(i, i)] / (interference + inst.noise_watts);
    }
    out
}

/// Network sum-rate in bits/s/Hz for the given active set.
pub fn sum_rate(inst: &NetworkInstance, active: &Subset) -> f64 {
    sinr(inst, active)
        .iter()
        .filter(|&&g| g > 0.0)
        .map(|&g| (1.0 + g).log2())
        .sum()
}
