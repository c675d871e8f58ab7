use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use dpp_core::Subset;
use network_sim::{sum_rate, NetworkInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum SolverTag {
    Gp,
    Brute,
    DpplMap,
    DpplSample,
    Thinning,
}

impl std::fmt::Display for SolverTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolverTag::Gp => "gp",
            SolverTag::Brute => "brute",
            SolverTag::DpplMap => "dppl-map",
            SolverTag::DpplSample => "dppl-sample",
            SolverTag::Thinning => "thinning",
        };
        f.write_str(s)
    }
}

/// One solved instance: the chosen subset plus its evaluation, or the error
/// that prevented solving it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalRecord {
    pub instance_id: String,
    pub solver_tag: SolverTag,
    pub active: Vec<usize>,
    pub sum_rate: f64,
    pub wall_time_micros: u64,
    pub subset_size: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl EvalRecord {
    /// Re-evaluates the stored subset against the instance; the stored
    /// sum-rate must agree to 1e-10.
    pub fn revalidate(&self, inst: &NetworkInstance) -> Result<()> {
        if self.error.is_some() {
            return Ok(());
        }
        let subset = Subset::new(self.active.clone())
            .map_err(|e| anyhow::anyhow!("record {}: {e}", self.instance_id))?;
        let fresh = sum_rate(inst, &subset);
        if (fresh - self.sum_rate).abs() > 1e-10 {
            bail!(
                "record {} ({}) does not re-evaluate: stored {} vs fresh {fresh}",
                self.instance_id,
                self.solver_tag,
                self.sum_rate
            );
        }
        Ok(())
    }
}

/// On-disk container for a solver's records over one dataset split.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordsFile {
    pub schema_version: u32,
    pub solver: SolverTag,
    pub split: String,
    pub records: Vec<EvalRecord>,
}

impl RecordsFile {
    pub fn new(solver: SolverTag, split: &str, records: Vec<EvalRecord>) -> Self {
        Self {
            schema_version: 1,
            solver,
            split: split.into(),
            records,
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)
            .with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use numerics::Matrix;

    #[test]
    fn tags_serialize_kebab_case() {
        assert_eq!(
            serde_json::to_string(&SolverTag::DpplMap).unwrap(),
            "\"dppl-map\""
        );
        assert_eq!(SolverTag::DpplSample.to_string(), "dppl-sample");
    }

    #[test]
    fn revalidation_catches_tampering() {
        let gain = Matrix::from_rows(1, 1, vec![1.0]).unwrap();
        let inst = NetworkInstance {
            scenario: network_sim::ScenarioTag::Adhoc,
            tx_pos: vec![[0.0; 3]],
            rx_pos: vec![[0.0; 3]],
            gain,
            p_high_watts: 1.0,
            noise_watts: 1.0,
            seed: 0,
            config_echo: serde_json::Value::Null,
            retries: 0,
        };
        let mut rec = EvalRecord {
            instance_id: "test-0".into(),
            solver_tag: SolverTag::Gp,
            active: vec![0],
            sum_rate: 1.0,
            wall_time_micros: 5,
            subset_size: 1,
            error: None,
        };
        rec.revalidate(&inst).unwrap();
        rec.sum_rate = 1.5;
        assert!(rec.revalidate(&inst).is_err());
    }
}
