use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dppl_model::{infer, InferMode, ModelParams};
use network_sim::{sum_rate, NetworkInstance};
use schedulers::{brute_force_schedule, gp_schedule, independent_thinning, GpConfig};

use crate::dataset::{instance_id, load_split, Manifest};
use crate::records::{EvalRecord, RecordsFile, SolverTag};
use crate::seed::derive_stream;

/// Everything a solver run needs besides the instances themselves.
#[derive(Debug, Clone)]
pub struct SolveContext {
    pub gp: GpConfig,
    pub params: Option<ModelParams>,
    pub pa: Option<f64>,
    pub master_seed: u64,
    pub workers: usize,
}

impl SolveContext {
    pub fn from_manifest(manifest: &Manifest, workers: usize) -> Self {
        Self {
            gp: manifest.config.effective_gp(),
            params: None,
            pa: None,
            master_seed: manifest.config.master_seed,
            workers: workers.max(1),
        }
    }
}

/// Order-preserving parallel map over instances with a bounded worker count.
pub fn parallel_map<T, U, F>(items: &[T], workers: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync,
{
    if workers <= 1 || items.len() <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<U>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.min(items.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let out = f(i, &items[i]);
                *slots[i].lock().expect("result slot") = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("slot lock").expect("worker filled slot"))
        .collect()
}

const STREAM_MAP: u64 = 3;
const STREAM_SAMPLE: u64 = 4;
const STREAM_THINNING: u64 = 5;

/// Runs one solver on one instance, timing only the computation.
pub fn solve_one(
    solver: SolverTag,
    inst: &NetworkInstance,
    id: &str,
    index: usize,
    ctx: &SolveContext,
) -> EvalRecord {
    let mut record = EvalRecord {
        instance_id: id.to_string(),
        solver_tag: solver,
        active: Vec::new(),
        sum_rate: 0.0,
        wall_time_micros: 0,
        subset_size: 0,
        error: None,
    };
    let outcome: Result<(Vec<usize>, f64, u64)> = (|| {
        let start = Instant::now();
        let (active, rate) = match solver {
            SolverTag::Gp => {
                let res = gp_schedule(inst, &ctx.gp)?;
                (res.active.indices().to_vec(), res.achieved_sum_rate)
            }
            SolverTag::Brute => {
                let res = brute_force_schedule(inst)?;
                (res.active.indices().to_vec(), res.achieved_sum_rate)
            }
            SolverTag::DpplMap | SolverTag::DpplSample => {
                let params = ctx
                    .params
                    .as_ref()
                    .ok_or_else(|| anyhow::anyhow!("{solver} requires trained model params"))?;
                let (mode, stream) = if solver == SolverTag::DpplMap {
                    (InferMode::Map, STREAM_MAP)
                } else {
                    (InferMode::Sample, STREAM_SAMPLE)
                };
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_stream(ctx.master_seed, index as u64, stream));
                let subset = infer(inst, params, mode, &mut rng)?;
                let rate = sum_rate(inst, &subset);
                (subset.indices().to_vec(), rate)
            }
            SolverTag::Thinning => {
                let pa = ctx
                    .pa
                    .ok_or_else(|| anyhow::anyhow!("thinning requires an activation probability"))?;
                let mut rng = ChaCha8Rng::seed_from_u64(derive_stream(
                    ctx.master_seed,
                    index as u64,
                    STREAM_THINNING,
                ));
                let subset = independent_thinning(inst, pa, &mut rng)?;
                let rate = sum_rate(inst, &subset);
                (subset.indices().to_vec(), rate)
            }
        };
        let micros = start.elapsed().as_micros() as u64;
        Ok((active, rate, micros))
    })();
    match outcome {
        Ok((active, rate, micros)) => {
            record.subset_size = active.len();
            record.active = active;
            record.sum_rate = rate;
            record.wall_time_micros = micros;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Runs a solver over a whole split, writing `<split>/records_<tag>.json`
/// into the dataset directory. Solver failures are recorded per instance and
/// reported in the return value; the run itself continues.
pub fn run_solver_over_split(
    data_dir: &Path,
    manifest: &Manifest,
    split: &str,
    solver: SolverTag,
    ctx: &SolveContext,
) -> Result<RecordsFile> {
    let instances = load_split(data_dir, manifest, split)?;
    let records = parallel_map(&instances, ctx.workers, |i, inst| {
        solve_one(solver, inst, &instance_id(split, i), i, ctx)
    });
    // Self-check: every successful record re-evaluates against its instance.
    for (rec, inst) in records.iter().zip(&instances) {
        rec.revalidate(inst)?;
    }
    let file = RecordsFile::new(solver, split, records);
    file.save(&data_dir.join(format!("{split}/records_{solver}.json")))?;
    Ok(file)
}

/// Reads GP (or brute) training labels back as a model training set.
pub fn labels_to_training_set(
    data_dir: &Path,
    manifest: &Manifest,
    labels: &RecordsFile,
) -> Result<dppl_model::TrainingSet> {
    let instances = load_split(data_dir, manifest, &labels.split)?;
    if instances.len() != labels.records.len() {
        bail!(
            "label count {} does not match split size {}",
            labels.records.len(),
            instances.len()
        );
    }
    let samples = instances
        .into_iter()
        .zip(&labels.records)
        .map(|(inst, rec)| -> Result<dppl_model::TrainingSample> {
            if let Some(err) = &rec.error {
                bail!("label {} carries a solver error: {err}", rec.instance_id);
            }
            Ok(dppl_model::TrainingSample {
                instance: inst,
                optimal: dpp_core::Subset::new(rec.active.clone())
                    .map_err(|e| anyhow::anyhow!("label {}: {e}", rec.instance_id))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(dppl_model::TrainingSet::new(samples)?)
}

/// Mean activation fraction of a labeled split, for the thinning baseline.
pub fn estimate_pa_from_labels(
    data_dir: &Path,
    manifest: &Manifest,
    labels: &RecordsFile,
) -> Result<f64> {
    let set = labels_to_training_set(data_dir, manifest, labels)?;
    let pairs: Vec<(dpp_core::Subset, usize)> = set
        .samples
        .iter()
        .map(|s| (s.optimal.clone(), s.instance.m()))
        .collect();
    Ok(schedulers::estimate_pa(&pairs)?)
}
