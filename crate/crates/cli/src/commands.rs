//! Argument parsing and subcommand dispatch.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use friction_core::coarse::{check_lumpability, coarse_grain, coarse_grain_unchecked};
use friction_core::dynamics::{friction_rate, lyapunov_check};
use friction_core::estimators::{estimate_alignment, estimate_entropy, estimate_friction_proxy, estimate_stake};
use friction_core::kernel::{friction_aggregate, friction_aware_allocation, legitimacy};
use friction_core::rom::{rom_integrate_with, stationary_distribution, stationary_residual, Population};
use friction_core::friction;
use friction_marl::{read_csv_path, run_experiment, to_csv_string, MetricsRecord};
use log::info;
use serde_json::{json, Value};

use crate::config::{AnalysisBlock, HeatmapBlock, RunConfig};
use crate::error::{CliError, Result};
use crate::heatmap::emit_heatmap;
use crate::io::{require_file, write_atomic};

pub const METRICS_FILE: &str = "metrics.csv";
pub const REPORT_FILE: &str = "analysis.json";
pub const COEFFICIENTS_FILE: &str = "coefficients.csv";
pub const HEATMAP_FILE: &str = "heatmap.svg";
pub const TRAJECTORY_FILE: &str = "rom_trajectory.csv";
pub const COARSE_FILE: &str = "coarse_system.json";

#[derive(Debug, Parser)]
#[command(name = "friction-lab", version, about = "Consent-friction models, MARL sweeps and analysis")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the sweep.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Friction of a triple or domain, or friction-aware allocation.
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    /// Measurement estimators.
    Estimate { mode: EstimateMode },
    /// Replicator-mutator dynamics.
    Rom {
        #[command(subcommand)]
        action: RomAction,
    },
    /// Friction along parameter paths.
    Dyn {
        #[command(subcommand)]
        action: DynAction,
    },
    /// Lumpability and coarse-graining.
    Coarse {
        #[command(subcommand)]
        action: CoarseAction,
    },
    /// Multi-agent experiments.
    Marl {
        #[command(subcommand)]
        action: MarlAction,
    },
    /// Regressions, model ranking and hypothesis tests over a metrics CSV.
    Analyze,
    /// Figures.
    Plot {
        #[command(subcommand)]
        action: PlotAction,
    },
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum KernelAction {
    Eval,
    Alloc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateMode {
    Alignment,
    Stake,
    Entropy,
    Proxy,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum RomAction {
    Simulate,
    Stationary,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum DynAction {
    Rate,
    Lyapunov,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CoarseAction {
    Check,
    Grain,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum MarlAction {
    Run,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum PlotAction {
    Heatmap,
}

/// Resolved settings shared by all subcommands.
struct Context {
    cfg: RunConfig,
    out: PathBuf,
    seed: Option<u64>,
    workers: usize,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let out = cli.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
        let seed = cli.seed.or(cfg.master_seed);
        let workers = cli
            .workers
            .or(cfg.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return Err(CliError::config("workers must be positive"));
        }
        Ok(Self { cfg, out, seed, workers })
    }

    fn output(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn block<'a, T>(b: &'a Option<T>, name: &'static str) -> Result<&'a T> {
    b.as_ref().ok_or(CliError::MissingBlock(name))
}

/// Run one subcommand and return the JSON document for stdout.
pub fn run(cli: &Cli) -> Result<Value> {
    let ctx = Context::new(cli)?;
    let cfg = &ctx.cfg;
    match cli.command {
        Command::Kernel { action: KernelAction::Eval } => {
            if let Some(k) = &cfg.kernel {
                Ok(json!({ "friction": friction(k)? }))
            } else if let Some(d) = &cfg.domain {
                Ok(json!({ "friction": friction_aggregate(d)?, "legitimacy": legitimacy(d)? }))
            } else {
                Err(CliError::MissingBlock("kernel"))
            }
        }
        Command::Kernel { action: KernelAction::Alloc } => {
            let alloc = friction_aware_allocation(block(&cfg.allocation, "allocation")?)?;
            Ok(json!({ "assignment": alloc.assignment, "friction": alloc.objective }))
        }
        Command::Estimate { mode } => estimate(cfg, mode),
        Command::Rom { action } => rom(&ctx, action),
        Command::Dyn { action } => dynamics(cfg, action),
        Command::Coarse { action } => coarse(&ctx, action),
        Command::Marl { action: MarlAction::Run } => marl_run(&ctx),
        Command::Analyze => analyze(&ctx),
        Command::Plot { action: PlotAction::Heatmap } => heatmap(&ctx),
    }
}

fn estimate(cfg: &RunConfig, mode: EstimateMode) -> Result<Value> {
    let b = block(&cfg.estimate, "estimate")?;
    Ok(match mode {
        EstimateMode::Alignment => json!({ "alignment": estimate_alignment(block(&b.alignment, "estimate.alignment")?)? }),
        EstimateMode::Stake => json!({ "stake": estimate_stake(block(&b.stake, "estimate.stake")?)? }),
        EstimateMode::Entropy => json!({ "entropy": estimate_entropy(block(&b.entropy, "estimate.entropy")?)? }),
        EstimateMode::Proxy => json!({ "proxy": estimate_friction_proxy(block(&b.proxy, "estimate.proxy")?)? }),
    })
}

fn rom(ctx: &Context, action: RomAction) -> Result<Value> {
    let b = block(&ctx.cfg.rom, "rom")?;
    match action {
        RomAction::Simulate => {
            if b.record_every == 0 {
                return Err(CliError::config("rom.record_every must be positive"));
            }
            let p0 = match &b.initial {
                Some(p) => p.clone(),
                None => Population::uniform(b.system.type_count())?,
            };
            let mut csv = String::from("step,t");
            for i in 0..p0.len() {
                let _ = write!(csv, ",p{i}");
            }
            csv.push('\n');
            let mut row = |step: usize, p: &Population| {
                let _ = write!(csv, "{step},{}", step as f64 * b.dt);
                for x in p.as_slice() {
                    let _ = write!(csv, ",{x}");
                }
                csv.push('\n');
            };
            row(0, &p0);
            let mut rows = 1;
            let last = rom_integrate_with(&p0, &b.system, b.dt, b.steps, |step, p| {
                if step % b.record_every == 0 || step == b.steps {
                    row(step, p);
                    rows += 1;
                }
            })?;
            let path = ctx.output(TRAJECTORY_FILE);
            write_atomic(&path, csv.as_bytes())?;
            Ok(json!({ "trajectory": path, "rows": rows, "final": last }))
        }
        RomAction::Stationary => {
            let p = stationary_distribution(&b.system, b.tolerance, b.max_iters)?;
            let residual = stationary_residual(&p, &b.system)?;
            Ok(json!({ "stationary": p, "residual": residual }))
        }
    }
}

fn dynamics(cfg: &RunConfig, action: DynAction) -> Result<Value> {
    let b = block(&cfg.dynamics, "dynamics")?;
    match action {
        DynAction::Rate => {
            let times: Vec<f64> = if b.times.is_empty() {
                if b.samples < 2 {
                    return Err(CliError::config("dynamics.samples must be at least 2"));
                }
                (0..b.samples).map(|i| b.horizon * i as f64 / (b.samples - 1) as f64).collect()
            } else {
                b.times.clone()
            };
            let rows = times
                .iter()
                .map(|&t| {
                    let k = b.path.triple_at(t)?;
                    Ok(json!({ "t": t, "friction": friction(&k)?, "rate": friction_rate(&k, &b.path.rates_at(t))? }))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Value::Array(rows))
        }
        DynAction::Lyapunov => {
            let report = lyapunov_check(&b.path, b.horizon, b.samples, b.sigma_max)?;
            Ok(serde_json::to_value(report).expect("report serializes"))
        }
    }
}

fn coarse(ctx: &Context, action: CoarseAction) -> Result<Value> {
    let b = block(&ctx.cfg.coarse, "coarse")?;
    match action {
        CoarseAction::Check => {
            let report = check_lumpability(&b.system, &b.partition, b.tolerance)?;
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["lumpable"] = json!(report.is_lumpable());
            Ok(v)
        }
        CoarseAction::Grain => {
            let p = match &b.population {
                Some(p) => p.clone(),
                None => Population::uniform(b.system.type_count())?,
            };
            let sys = if b.approximate {
                coarse_grain_unchecked(&b.system, &b.partition, &p)?
            } else {
                coarse_grain(&b.system, &b.partition, &p, b.tolerance)?
            };
            let text = serde_json::to_string_pretty(&sys).expect("system serializes");
            let path = ctx.output(COARSE_FILE);
            write_atomic(&path, text.as_bytes())?;
            Ok(json!({ "system": sys, "file": path }))
        }
    }
}

fn marl_run(ctx: &Context) -> Result<Value> {
    let mut exp = ctx.cfg.marl.clone().unwrap_or_default();
    if let Some(seed) = ctx.seed {
        exp.design.master_seed = seed;
    }
    exp.validate()?;
    info!(
        "sweep: {} conditions x {} replications on {} workers",
        exp.design.condition_count(),
        exp.design.replications,
        ctx.workers
    );
    let records = run_experiment(&exp, ctx.workers)?;
    let path = ctx.output(METRICS_FILE);
    write_atomic(&path, to_csv_string(&records)?.as_bytes())?;
    let failed = records.iter().filter(|r| r.failed()).count();
    info!("wrote {} records to {}", records.len(), path.display());
    if failed > 0 {
        return Err(CliError::RunsFailed {
            failed,
            total: records.len(),
        });
    }
    Ok(json!({ "metrics": path, "records": records.len(), "failed": failed }))
}

fn load_records(input: Option<&Path>, ctx: &Context) -> Result<(PathBuf, Vec<MetricsRecord>)> {
    let path = input.map_or_else(|| ctx.output(METRICS_FILE), Path::to_path_buf);
    require_file(&path)?;
    let records = read_csv_path(&path)?;
    Ok((path, records))
}

fn analyze(ctx: &Context) -> Result<Value> {
    let b = ctx.cfg.analysis.clone().unwrap_or_else(AnalysisBlock::default);
    let (input, records) = load_records(b.input.as_deref(), ctx)?;
    let report = friction_analysis::analyze(&records, &b.analysis_config(ctx.seed))?;
    let report_path = ctx.output(REPORT_FILE);
    let coef_path = ctx.output(COEFFICIENTS_FILE);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    write_atomic(&report_path, text.as_bytes())?;
    write_atomic(&coef_path, friction_analysis::coefficients_csv(&report)?.as_bytes())?;
    info!("analyzed {} records from {}", records.len(), input.display());
    Ok(json!({
        "report": report_path,
        "coefficients": coef_path,
        "records": report.n_records,
        "failed": report.n_failed,
    }))
}

fn heatmap(ctx: &Context) -> Result<Value> {
    let b = ctx.cfg.heatmap.clone().unwrap_or_else(HeatmapBlock::default);
    let (_, records) = load_records(b.input.as_deref(), ctx)?;
    let path = ctx.output(HEATMAP_FILE);
    let map = emit_heatmap(&records, b.x, b.y, b.metric, b.convergence_horizon, &path)?;
    let (lo, hi) = map.range();
    Ok(json!({
        "heatmap": path,
        "cells": map.xs.len() * map.ys.len(),
        "min": lo,
        "max": hi,
    }))
}
