use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use network_sim::NetworkInstance;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    /// Relative instance file paths per split.
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl Manifest {
    pub fn load(data_dir: &Path) -> Result<Self> {
        let path = data_dir.join("manifest.json");
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn split(&self, name: &str) -> Result<&[String]> {
        match name {
            "train" => Ok(&self.train),
            "test" => Ok(&self.test),
            other => bail!("unknown split '{other}' (expected train or test)"),
        }
    }
}

/// Stable instance identifier derived from the split and file index.
pub fn instance_id(split: &str, index: usize) -> String {
    format!("{split}-{index:05}")
}

/// Writes the full dataset: train and test instance files plus the
/// manifest. Fully determined by the config (instance index seeds the
/// per-instance stream).
pub fn generate_dataset(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Manifest> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir.join("train"))
        .with_context(|| format!("creating {}", out_dir.display()))?;
    std::fs::create_dir_all(out_dir.join("test"))?;

    let train_size = cfg.effective_train_size();
    let mut train = Vec::with_capacity(train_size);
    let mut test = Vec::with_capacity(cfg.test_size);
    for i in 0..train_size + cfg.test_size {
        let inst = cfg.gen_instance(i as u64)?;
        let (split, local) = if i < train_size {
            ("train", i)
        } else {
            ("test", i - train_size)
        };
        let rel = format!("{split}/instance_{local:05}.json");
        std::fs::write(out_dir.join(&rel), inst.to_json()?)?;
        if i < train_size {
            train.push(rel);
        } else {
            test.push(rel);
        }
    }

    let manifest = Manifest {
        schema_version: 1,
        config: cfg.clone(),
        train,
        test,
    };
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// Loads one split's instances in manifest order.
pub fn load_split(data_dir: &Path, manifest: &Manifest, split: &str) -> Result<Vec<NetworkInstance>> {
    manifest
        .split(split)?
        .iter()
        .map(|rel| -> Result<NetworkInstance> {
            let path: PathBuf = data_dir.join(rel);
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            Ok(NetworkInstance::from_json(&text)?)
        })
        .collect()
}
