use std::path::Path;

use anyhow::{bail, Context, Result};

use network_sim::{gen_adhoc, gen_dronecell, AdHocConfig, DroneCellConfig, NetworkInstance, ScenarioTag};
use numerics::Matrix;

use crate::config::ExperimentConfig;
use crate::records::SolverTag;
use crate::seed::derive_seed;
use crate::solve::{solve_one, SolveContext};

/// Draws an instance with exactly `size` links. Ad hoc realizations are
/// resampled until the Poisson count hits the target; drone realizations are
/// generated at high occupancy and truncated to the first `size` links.
pub fn instance_of_size(cfg: &ExperimentConfig, size: usize, seed: u64) -> Result<NetworkInstance> {
    match cfg.scenario {
        ScenarioTag::Adhoc => {
            for attempt in 0..100_000u64 {
                let inst = gen_adhoc(&AdHocConfig {
                    density: size as f64,
                    seed: seed.wrapping_add(attempt.wrapping_mul(0x9e37)),
                    ..cfg.adhoc.clone()
                })?;
                if inst.m() == size {
                    return Ok(inst);
                }
            }
            bail!("could not draw an ad hoc realization with exactly {size} links");
        }
        ScenarioTag::Dronecell => {
            // 20 drones per sector on average saturates the 57 sectors.
            let drone_count = (size * 20).max(cfg.dronecell.drone_count);
            for attempt in 0..1000u64 {
                let inst = gen_dronecell(&DroneCellConfig {
                    drone_count,
                    seed: seed.wrapping_add(attempt.wrapping_mul(0x9e37)),
                    ..cfg.dronecell.clone()
                })?;
                if inst.m() == size {
                    return Ok(inst);
                }
                if inst.m() > size {
                    return Ok(truncate_instance(&inst, size));
                }
            }
            bail!("could not draw a drone realization with at least {size} links");
        }
    }
}

/// Keeps the first `size` links of an instance (gain principal submatrix).
pub fn truncate_instance(inst: &NetworkInstance, size: usize) -> NetworkInstance {
    assert!(size >= 1 && size <= inst.m());
    let idx: Vec<usize> = (0..size).collect();
    NetworkInstance {
        scenario: inst.scenario,
        tx_pos: inst.tx_pos[..size].to_vec(),
        rx_pos: inst.rx_pos[..size].to_vec(),
        gain: submatrix(&inst.gain, &idx),
        p_high_watts: inst.p_high_watts,
        noise_watts: inst.noise_watts,
        seed: inst.seed,
        config_echo: inst.config_echo.clone(),
        retries: inst.retries,
    }
}

fn submatrix(m: &Matrix, idx: &[usize]) -> Matrix {
    m.principal_submatrix(idx)
}

/// Runtime-versus-network-size benchmark: `reps` fresh instances per size,
/// every solver timed on the same instances, a discarded warm-up run per
/// size, means written as one CSV row per size. Timing covers computation
/// only; instance generation and file output sit outside the clocks.
pub fn cmd_bench(
    cfg: &ExperimentConfig,
    sizes: &[usize],
    reps: usize,
    solvers: &[SolverTag],
    ctx: &SolveContext,
    out_dir: &Path,
) -> Result<usize> {
    if sizes.is_empty() || solvers.is_empty() || reps == 0 {
        bail!("bench needs at least one size, one solver and one repetition");
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let mut writer = csv::Writer::from_path(out_dir.join("runtime_vs_size.csv"))?;
    let mut header = vec!["size".to_string()];
    header.extend(solvers.iter().map(|s| format!("{s}MeanMicros")));
    writer.write_record(&header)?;

    let mut failures = 0usize;
    for &size in sizes {
        let warmup = instance_of_size(cfg, size, derive_seed(ctx.master_seed, u64::MAX))?;
        for &solver in solvers {
            let _ = solve_one(solver, &warmup, "warmup", 0, ctx);
        }
        let mut totals = vec![0.0f64; solvers.len()];
        let mut counts = vec![0usize; solvers.len()];
        for rep in 0..reps {
            let seed = derive_seed(ctx.master_seed, (size * 1_000_003 + rep) as u64);
            let inst = instance_of_size(cfg, size, seed)?;
            for (si, &solver) in solvers.iter().enumerate() {
                let rec = solve_one(solver, &inst, &format!("bench-{size}-{rep}"), rep, ctx);
                if rec.error.is_some() {
                    failures += 1;
                } else {
                    totals[si] += rec.wall_time_micros as f64;
                    counts[si] += 1;
                }
            }
        }
        let mut row = vec![size.to_string()];
        for (total, count) in totals.iter().zip(&counts) {
            row.push(format!("{}", total / (*count).max(1) as f64));
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adhoc_size_conditioning_is_exact() {
        let cfg = ExperimentConfig::default();
        for size in [2usize, 5] {
            let inst = instance_of_size(&cfg, size, 1).unwrap();
            assert_eq!(inst.m(), size);
        }
    }

    #[test]
    fn truncation_keeps_leading_links() {
        let cfg = ExperimentConfig::default();
        let inst = cfg.gen_instance(0).unwrap();
        let cut = truncate_instance(&inst, 3);
        assert_eq!(cut.m(), 3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(cut.gain[(i, j)], inst.gain[(i, j)]);
            }
            assert_eq!(cut.tx_pos[i], inst.tx_pos[i]);
        }
    }

    #[test]
    fn bench_csv_has_one_row_per_size() {
        let cfg = ExperimentConfig {
            adhoc: network_sim::AdHocConfig {
                density: 4.0,
                ..network_sim::AdHocConfig::default()
            },
            ..ExperimentConfig::default()
        };
        let ctx = SolveContext {
            gp: cfg.effective_gp(),
            params: None,
            pa: Some(0.5),
            master_seed: 0,
            workers: 1,
        };
        let dir = std::env::temp_dir().join(format!("bench-cli-bench-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let failures = cmd_bench(
            &cfg,
            &[2, 3],
            2,
            &[SolverTag::Thinning, SolverTag::Brute],
            &ctx,
            &dir,
        )
        .unwrap();
        assert_eq!(failures, 0);
        let text = std::fs::read_to_string(dir.join("runtime_vs_size.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3, "header plus one row per size: {text}");
        assert_eq!(lines[0], "size,thinningMeanMicros,bruteMeanMicros");
        let _ = std::fs::remove_dir_all(dir);
    }
}
