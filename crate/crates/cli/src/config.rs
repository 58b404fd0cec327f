//! JSON run configuration.

use std::path::{Path, PathBuf};

use friction_analysis::AnalysisConfig;
use friction_core::coarse::Partition;
use friction_core::dynamics::ParameterPath;
use friction_core::estimators::{AlignmentInput, EntropyInput, ProxyInput, StakeInput};
use friction_core::kernel::AllocationProblem;
use friction_core::rom::{Population, RomSystem};
use friction_core::{DelegationDomain, KernelTriple};
use friction_marl::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::heatmap::{Factor, Metric};
use crate::io::read_to_string;

/// Parameter blocks for every subcommand. Only the blocks a subcommand
/// reads need to be present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub kernel: Option<KernelTriple>,
    #[serde(default)]
    pub domain: Option<DelegationDomain>,
    #[serde(default)]
    pub allocation: Option<AllocationProblem>,
    #[serde(default)]
    pub estimate: Option<EstimateBlock>,
    #[serde(default)]
    pub rom: Option<RomBlock>,
    #[serde(default)]
    pub dynamics: Option<DynamicsBlock>,
    #[serde(default)]
    pub coarse: Option<CoarseBlock>,
    #[serde(default)]
    pub marl: Option<ExperimentConfig>,
    #[serde(default)]
    pub analysis: Option<AnalysisBlock>,
    #[serde(default)]
    pub heatmap: Option<HeatmapBlock>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateBlock {
    #[serde(default)]
    pub alignment: Option<AlignmentInput>,
    #[serde(default)]
    pub stake: Option<StakeInput>,
    #[serde(default)]
    pub entropy: Option<EntropyInput>,
    #[serde(default)]
    pub proxy: Option<ProxyInput>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RomBlock {
    pub system: RomSystem,
    /// Uniform when absent.
    #[serde(default)]
    pub initial: Option<Population>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Keep every n-th state of the trajectory.
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsBlock {
    pub path: ParameterPath,
    /// Times at which `dyn rate` evaluates the friction rate.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_sigma_max")]
    pub sigma_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseBlock {
    pub system: RomSystem,
    pub partition: Partition,
    /// Population conditioning the coarse weights; uniform when absent.
    #[serde(default)]
    pub population: Option<Population>,
    #[serde(default = "default_lump_tolerance")]
    pub tolerance: f64,
    /// Grain with class averages even when the partition is not lumpable.
    #[serde(default)]
    pub approximate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisBlock {
    /// Metrics CSV; `<out>/metrics.csv` when absent.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_convergence_horizon")]
    pub convergence_horizon: usize,
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        Self {
            input: None,
            seed: None,
            permutations: default_permutations(),
            convergence_horizon: default_convergence_horizon(),
        }
    }
}

impl AnalysisBlock {
    pub fn analysis_config(&self, seed: Option<u64>) -> AnalysisConfig {
        AnalysisConfig {
            seed: seed.or(self.seed).unwrap_or(0),
            permutations: self.permutations,
            convergence_horizon: self.convergence_horizon,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapBlock {
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default = "default_x")]
    pub x: Factor,
    #[serde(default = "default_y")]
    pub y: Factor,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default = "default_convergence_horizon")]
    pub convergence_horizon: usize,
}

impl Default for HeatmapBlock {
    fn default() -> Self {
        Self {
            input: None,
            x: default_x(),
            y: default_y(),
            metric: Metric::default(),
            convergence_horizon: default_convergence_horizon(),
        }
    }
}

fn default_dt() -> f64 {
    1e-3
}
fn default_steps() -> usize {
    1000
}
fn one() -> usize {
    1
}
fn default_tolerance() -> f64 {
    1e-12
}
fn default_max_iters() -> usize {
    100_000
}
fn default_horizon() -> f64 {
    10.0
}
fn default_samples() -> usize {
    101
}
fn default_sigma_max() -> f64 {
    f64::MAX
}
fn default_lump_tolerance() -> f64 {
    1e-9
}
fn default_permutations() -> usize {
    1000
}
fn default_convergence_horizon() -> usize {
    10_000
}
fn default_x() -> Factor {
    Factor::Alpha
}
fn default_y() -> Factor {
    Factor::Sigma
}

impl RunConfig {
    /// Parse a config document. Errors carry the JSON path of the offending field.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            CliError::Config {
                file: None,
                field: (field != ".").then_some(field),
                message: e.into_inner().to_string(),
            }
        })
    }

    /// Load from disk. Relative input paths and `out_dir` are resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config { field, message, .. } => CliError::Config {
                file: Some(path.to_path_buf()),
                field,
                message,
            },
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.out_dir.as_mut() {
            rebase(p);
        }
        if let Some(p) = cfg.analysis.as_mut().and_then(|a| a.input.as_mut()) {
            rebase(p);
        }
        if let Some(p) = cfg.heatmap.as_mut().and_then(|h| h.input.as_mut()) {
            rebase(p);
        }
        Ok(cfg)
    }
}
