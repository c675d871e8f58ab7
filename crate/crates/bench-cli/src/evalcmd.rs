use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::dataset::Manifest;
use crate::records::{RecordsFile, SolverTag};
use crate::solve::{run_solver_over_split, SolveContext};

/// Summary artifact accompanying the CDF data.
#[derive(Debug, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalSummary {
    pub mean_sum_rate: BTreeMap<String, f64>,
    pub mean_runtime_micros: BTreeMap<String, f64>,
    /// Pairwise mean-runtime ratios, keyed "a/b".
    pub runtime_ratios: BTreeMap<String, f64>,
    pub test_size: usize,
    pub failures: usize,
}

/// Runs every requested solver over the test split and writes plot-ready
/// artifacts: per-solver sorted sum-rate columns (for empirical CDFs), mean
/// runtimes, and a summary JSON. Returns the number of per-instance solver
/// failures (the caller maps this to the exit code).
pub fn cmd_eval(
    data_dir: &Path,
    solvers: &[SolverTag],
    ctx: &SolveContext,
    out_dir: &Path,
) -> Result<EvalSummary> {
    if solvers.is_empty() {
        bail!("no solvers requested");
    }
    let manifest = Manifest::load(data_dir)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let mut per_solver: Vec<(SolverTag, RecordsFile)> = Vec::new();
    for &solver in solvers {
        let file = run_solver_over_split(data_dir, &manifest, "test", solver, ctx)?;
        per_solver.push((solver, file));
    }

    // CDF CSV: one sorted column per solver.
    let rows = manifest.test.len();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (_, file) in &per_solver {
        let mut rates: Vec<f64> = file
            .records
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| r.sum_rate)
            .collect();
        rates.sort_by(|a, b| a.partial_cmp(b).expect("finite sum rates"));
        rates.resize(rows, f64::NAN); // pad if failures dropped entries
        columns.push(rates);
    }
    let mut writer = csv::Writer::from_path(out_dir.join("cdf_sumrate.csv"))?;
    writer.write_record(per_solver.iter().map(|(s, _)| s.to_string()))?;
    for row in 0..rows {
        writer.write_record(columns.iter().map(|col| format!("{}", col[row])))?;
    }
    writer.flush()?;

    // Mean runtimes CSV plus the summary JSON.
    let mut summary = EvalSummary {
        mean_sum_rate: BTreeMap::new(),
        mean_runtime_micros: BTreeMap::new(),
        runtime_ratios: BTreeMap::new(),
        test_size: rows,
        failures: 0,
    };
    for (solver, file) in &per_solver {
        let ok: Vec<_> = file.records.iter().filter(|r| r.error.is_none()).collect();
        summary.failures += file.failures();
        let n = ok.len().max(1) as f64;
        summary.mean_sum_rate.insert(
            solver.to_string(),
            ok.iter().map(|r| r.sum_rate).sum::<f64>() / n,
        );
        summary.mean_runtime_micros.insert(
            solver.to_string(),
            ok.iter().map(|r| r.wall_time_micros as f64).sum::<f64>() / n,
        );
    }
    for (a, ta) in &summary.mean_runtime_micros {
        for (b, tb) in &summary.mean_runtime_micros {
            if a != b && *tb > 0.0 {
                summary.runtime_ratios.insert(format!("{a}/{b}"), ta / tb);
            }
        }
    }
    let mut writer = csv::Writer::from_path(out_dir.join("runtime.csv"))?;
    writer.write_record(["solver", "meanWallTimeMicros"])?;
    for (solver, micros) in &summary.mean_runtime_micros {
        writer.write_record([solver.clone(), format!("{micros}")])?;
    }
    writer.flush()?;
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}
