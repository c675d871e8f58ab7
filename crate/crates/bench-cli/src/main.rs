use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use bench_cli::bench::cmd_bench;
use bench_cli::config::ExperimentConfig;
use bench_cli::dataset::{generate_dataset, Manifest};
use bench_cli::evalcmd::cmd_eval;
use bench_cli::records::{RecordsFile, SolverTag};
use bench_cli::solve::{estimate_pa_from_labels, run_solver_over_split, SolveContext};
use bench_cli::traincmd::cmd_train;
use dppl_model::{ModelFamily, ModelParams, TrainConfig};

#[derive(Parser)]
#[command(name = "bench-cli", about = "Dataset generation, scheduling baselines, \
model training and evaluation for the link-scheduling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a train/test dataset of network instances.
    Generate {
        /// Experiment config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scheduler over one dataset split, writing per-instance records.
    Solve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "train")]
        split: String,
        #[arg(long, value_delimiter = ',', required = true)]
        solver: Vec<SolverTag>,
        /// Trained model parameters (required for dppl-* solvers).
        #[arg(long)]
        params: Option<PathBuf>,
        /// Thinning activation probability; alternatively derive it with
        /// --labels.
        #[arg(long)]
        pa: Option<f64>,
        /// Training-label records used to estimate the thinning probability.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Fit model parameters on a labeled training split.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
    },
    /// Evaluate solvers on the test split: CDF columns, runtimes, summary.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        solver: Vec<SolverTag>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        pa: Option<f64>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Runtime-versus-network-size comparison.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        solver: Vec<SolverTag>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        pa: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
#[clap(rename_all = "lowercase")]
enum FamilyArg {
    Adhoc,
    Dronecell,
}

impl From<FamilyArg> for ModelFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Adhoc => ModelFamily::Adhoc,
            FamilyArg::Dronecell => ModelFamily::Dronecell,
        }
    }
}

fn load_config(path: &Option<PathBuf>, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_params(path: &Option<PathBuf>) -> Result<Option<ModelParams>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| anyhow::anyhow!("reading params {}: {e}", p.display()))?;
            Ok(Some(ModelParams::from_json(&text)?))
        }
    }
}

fn resolve_pa(
    data: &std::path::Path,
    manifest: &Manifest,
    pa: Option<f64>,
    labels: &Option<PathBuf>,
    needed: bool,
) -> Result<Option<f64>> {
    if let Some(p) = pa {
        return Ok(Some(p));
    }
    if let Some(path) = labels {
        let records = RecordsFile::load(path)?;
        return Ok(Some(estimate_pa_from_labels(data, manifest, &records)?));
    }
    if needed {
        bail!("thinning requires --pa or --labels");
    }
    Ok(None)
}

/// Exit codes: 0 clean, 1 per-instance solver failures occurred, 2 usage or
/// configuration errors.
fn run() -> Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            generate_dataset(&cfg, &out)?;
            Ok(0)
        }
        Command::Solve {
            data,
            split,
            solver,
            params,
            pa,
            labels,
            workers,
        } => {
            let manifest = Manifest::load(&data)?;
            let mut ctx = SolveContext::from_manifest(&manifest, workers);
            ctx.params = load_params(&params)?;
            let needs_pa = solver.contains(&SolverTag::Thinning);
            ctx.pa = resolve_pa(&data, &manifest, pa, &labels, needs_pa)?;
            let mut failures = 0;
            for tag in solver {
                failures += run_solver_over_split(&data, &manifest, &split, tag, &ctx)?.failures();
            }
            Ok(if failures > 0 { 1 } else { 0 })
        }
        Command::Train {
            data,
            labels,
            family,
            out,
            seed,
            max_iters,
        } => {
            let cfg = TrainConfig {
                max_iters,
                seed,
                ..TrainConfig::default()
            };
            cmd_train(&data, &labels, family.into(), &out, &cfg)?;
            Ok(0)
        }
        Command::Eval {
            data,
            solver,
            params,
            pa,
            labels,
            out,
            workers,
        } => {
            let manifest = Manifest::load(&data)?;
            let mut ctx = SolveContext::from_manifest(&manifest, workers);
            ctx.params = load_params(&params)?;
            let needs_pa = solver.contains(&SolverTag::Thinning);
            ctx.pa = resolve_pa(&data, &manifest, pa, &labels, needs_pa)?;
            let summary = cmd_eval(&data, &solver, &ctx, &out)?;
            Ok(if summary.failures > 0 { 1 } else { 0 })
        }
        Command::Bench {
            config,
            seed,
            sizes,
            reps,
            solver,
            params,
            pa,
            out,
            workers,
        } => {
            let cfg = load_config(&config, seed)?;
            let ctx = SolveContext {
                gp: cfg.effective_gp(),
                params: load_params(&params)?,
                pa,
                master_seed: cfg.master_seed,
                workers,
            };
            let failures = cmd_bench(&cfg, &sizes, reps, &solver, &ctx, &out)?;
            Ok(if failures > 0 { 1 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
