use std::path::Path;

use anyhow::{Context, Result};

use dppl_model::{train_with_trace, ModelFamily, ModelParams, TrainConfig};

use crate::dataset::Manifest;
use crate::records::RecordsFile;
use crate::solve::labels_to_training_set;

/// Trains a model family on a labeled training split, writing the fitted
/// parameters (JSON) and the per-iteration log-likelihood trace (CSV).
pub fn cmd_train(
    data_dir: &Path,
    labels_path: &Path,
    family: ModelFamily,
    out_path: &Path,
    cfg: &TrainConfig,
) -> Result<ModelParams> {
    let manifest = Manifest::load(data_dir)?;
    let labels = RecordsFile::load(labels_path)?;
    let set = labels_to_training_set(data_dir, &manifest, &labels)?;
    let init = ModelParams::init(family);
    let (fitted, trace) = train_with_trace(&set, &init, cfg)?;

    std::fs::write(out_path, fitted.to_json()?)
        .with_context(|| format!("writing {}", out_path.display()))?;
    let trace_path = out_path.with_extension("trace.csv");
    let mut writer = csv::Writer::from_path(&trace_path)
        .with_context(|| format!("writing {}", trace_path.display()))?;
    writer.write_record(["iteration", "logLikelihood"])?;
    for (i, v) in trace.iter().enumerate() {
        writer.write_record([i.to_string(), format!("{v}")])?;
    }
    writer.flush()?;
    Ok(fitted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::dataset::generate_dataset;
    use crate::records::SolverTag;
    use crate::solve::{run_solver_over_split, SolveContext};

    #[test]
    fn train_writes_params_and_nondecreasing_trace() {
        let cfg = ExperimentConfig {
            train_size: 4,
            test_size: 1,
            adhoc: network_sim::AdHocConfig {
                density: 5.0,
                ..network_sim::AdHocConfig::default()
            },
            ..ExperimentConfig::default()
        };
        let dir = std::env::temp_dir().join(format!("bench-cli-train-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let manifest = generate_dataset(&cfg, &dir).unwrap();
        let ctx = SolveContext::from_manifest(&manifest, 1);
        run_solver_over_split(&dir, &manifest, "train", SolverTag::Gp, &ctx).unwrap();

        let out = dir.join("params.json");
        let train_cfg = TrainConfig {
            max_iters: 25,
            ..TrainConfig::default()
        };
        let fitted_a = cmd_train(
            &dir,
            &dir.join("train/records_gp.json"),
            ModelFamily::Adhoc,
            &out,
            &train_cfg,
        )
        .unwrap();
        let fitted_b = cmd_train(
            &dir,
            &dir.join("train/records_gp.json"),
            ModelFamily::Adhoc,
            &out,
            &train_cfg,
        )
        .unwrap();
        assert_eq!(fitted_a, fitted_b, "training is deterministic");

        let text = std::fs::read_to_string(dir.join("params.trace.csv")).unwrap();
        let values: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|line| line.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!(!values.is_empty());
        assert!(
            values.windows(2).all(|w| w[1] >= w[0]),
            "likelihood trace must be non-decreasing"
        );
        let back = ModelParams::from_json(&std::fs::read_to_string(out).unwrap()).unwrap();
        assert_eq!(back, fitted_a);
        let _ = std::fs::remove_dir_all(dir);
    }
}
