use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use network_sim::{AdHocConfig, DroneCellConfig, NetworkInstance, ScenarioTag};
use schedulers::GpConfig;

use crate::seed::derive_seed;

/// Top-level experiment description, loaded from a JSON file with flag
/// overrides applied on top.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExperimentConfig {
    pub scenario: ScenarioTag,
    pub adhoc: AdHocConfig,
    pub dronecell: DroneCellConfig,
    /// 0 means "scenario default" (300 ad hoc, 200 drone).
    pub train_size: usize,
    pub test_size: usize,
    pub master_seed: u64,
    /// Scheduler settings; omitted fields get scenario defaults (activity
    /// threshold 3 dBm ad hoc, 15 dBm drone).
    pub gp: Option<GpConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioTag::Adhoc,
            adhoc: AdHocConfig::default(),
            dronecell: DroneCellConfig::default(),
            train_size: 0,
            test_size: 200,
            master_seed: 0,
            gp: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.effective_train_size() < 1 || self.test_size < 1 {
            bail!("trainSize and testSize must be >= 1");
        }
        Ok(())
    }

    pub fn effective_train_size(&self) -> usize {
        if self.train_size > 0 {
            return self.train_size;
        }
        match self.scenario {
            ScenarioTag::Adhoc => 300,
            ScenarioTag::Dronecell => 200,
        }
    }

    pub fn effective_gp(&self) -> GpConfig {
        self.gp.clone().unwrap_or_else(|| match self.scenario {
            ScenarioTag::Adhoc => GpConfig::default().with_threshold_dbm(3.0),
            ScenarioTag::Dronecell => GpConfig::default().with_threshold_dbm(15.0),
        })
    }

    /// Generates the instance at a dataset index, seeding its random stream
    /// from `(masterSeed, index)`.
    pub fn gen_instance(&self, index: u64) -> Result<NetworkInstance> {
        let seed = derive_seed(self.master_seed, index);
        let inst = match self.scenario {
            ScenarioTag::Adhoc => network_sim::gen_adhoc(&AdHocConfig {
                seed,
                ..self.adhoc.clone()
            })?,
            ScenarioTag::Dronecell => network_sim::gen_dronecell(&DroneCellConfig {
                seed,
                ..self.dronecell.clone()
            })?,
        };
        Ok(inst)
    }
}
