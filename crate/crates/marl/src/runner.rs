//! Factorial sweep over alignment, stake and noise levels.

use friction_core::{friction, KernelTriple};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{train_agents, AgentConfig, ProbeGrid};
use crate::env::{make_rewards, EnvConfig};
use crate::error::{config, Result};
use crate::metrics::{convergence_time, measured_alignment, pareto_inefficiency, policy_variance, reward_gap};
use crate::record::MetricsRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentDesign {
    pub alpha_levels: Vec<f64>,
    pub sigma_levels: Vec<f64>,
    pub epsilon_levels: Vec<f64>,
    pub replications: usize,
    pub master_seed: u64,
}

impl Default for ExperimentDesign {
    fn default() -> Self {
        Self {
            alpha_levels: vec![-0.8, -0.4, 0.0, 0.4, 0.8],
            sigma_levels: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            epsilon_levels: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            replications: 30,
            master_seed: 0,
        }
    }
}

impl ExperimentDesign {
    /// Three levels per factor, five replications.
    pub fn desk(master_seed: u64) -> Self {
        Self {
            alpha_levels: vec![-0.4, 0.0, 0.8],
            sigma_levels: vec![0.2, 0.6, 1.0],
            epsilon_levels: vec![0.0, 0.5, 1.0],
            replications: 5,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, levels: &[f64], ok: &dyn Fn(f64) -> bool| {
            if levels.is_empty() {
                return Err(config(format!("{name} needs at least one level")));
            }
            match levels.iter().find(|&&x| !ok(x)) {
                Some(x) => Err(config(format!("{name} level {x} out of range"))),
                None => Ok(()),
            }
        };
        check("alpha", &self.alpha_levels, &|a| a > -1.0 && a <= 1.0)?;
        check("sigma", &self.sigma_levels, &|s| (0.0..=1.0).contains(&s))?;
        check("epsilon", &self.epsilon_levels, &|e| (0.0..=1.0).contains(&e))?;
        if self.replications == 0 {
            return Err(config("replications must be at least 1"));
        }
        Ok(())
    }

    pub fn condition_count(&self) -> usize {
        self.alpha_levels.len() * self.sigma_levels.len() * self.epsilon_levels.len()
    }

    /// Factor indices of condition `c`, alpha slowest and epsilon fastest.
    pub fn condition(&self, c: usize) -> (usize, usize, usize) {
        let ne = self.epsilon_levels.len();
        let ns = self.sigma_levels.len();
        (c / (ns * ne), (c / ne) % ns, c % ne)
    }
}

/// Settings of the metric computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Trailing share of episodes averaged for reward gap and Pareto distance.
    pub eval_fraction: f64,
    pub probe_points: usize,
    pub convergence_delta: f64,
    pub alignment_samples: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            eval_fraction: 0.1,
            probe_points: 5,
            convergence_delta: 0.5,
            alignment_samples: 2000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub design: ExperimentDesign,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        self.env.validate()?;
        self.agent.validate()?;
        let m = &self.metrics;
        if !(m.eval_fraction > 0.0 && m.eval_fraction <= 1.0) {
            return Err(config("eval_fraction must lie in (0, 1]"));
        }
        if m.probe_points == 0 || m.alignment_samples < 2 || !(m.convergence_delta > 0.0) {
            return Err(config("probe_points, alignment_samples and convergence_delta must be positive"));
        }
        Ok(())
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one run: `splitmix64(splitmix64(master ^ splitmix64(condition)) ^ replication)`.
pub fn derive_seed(master: u64, condition: usize, replication: usize) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(condition as u64)) ^ replication as u64)
}

struct RunOutput {
    record: MetricsRecord,
    final_policy: Option<Vec<f64>>,
}

fn run_one(cfg: &ExperimentConfig, probes: &ProbeGrid, condition: usize, replication: usize) -> RunOutput {
    let d = &cfg.design;
    let (ai, si, ei) = d.condition(condition);
    let (alpha, sigma, epsilon) = (d.alpha_levels[ai], d.sigma_levels[si], d.epsilon_levels[ei]);
    let seed = derive_seed(d.master_seed, condition, replication);
    let theoretical_friction = KernelTriple::new(alpha, sigma, epsilon)
        .and_then(|k| friction(&k))
        .expect("design levels validated");
    let mut record = MetricsRecord {
        alpha_index: ai,
        sigma_index: si,
        epsilon_index: ei,
        replication,
        alpha,
        sigma,
        epsilon,
        seed,
        reward_gap: None,
        convergence_time: None,
        policy_variance: None,
        pareto_inefficiency: None,
        measured_alignment: None,
        theoretical_friction,
        error: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome = (|| -> Result<Vec<f64>> {
        let rewards = make_rewards(alpha, sigma, &cfg.env, &mut rng)?;
        let out = train_agents(&cfg.env, &rewards, &cfg.agent, epsilon, probes, &mut rng)?;
        let episodes = out.reward_trace.len();
        let window = ((episodes as f64 * cfg.metrics.eval_fraction).ceil() as usize).clamp(1, episodes);
        let tail = episodes - window;
        record.reward_gap = Some(reward_gap(&out.reward_trace[tail..], &rewards, &cfg.env)?);
        let n = cfg.env.n_agents;
        let realized: Vec<f64> = (0..n)
            .map(|i| out.agent_reward_trace[tail..].iter().map(|r| r[i]).sum::<f64>() / window as f64)
            .collect();
        record.pareto_inefficiency = Some(pareto_inefficiency(&realized, &rewards, &cfg.env)?);
        record.convergence_time = Some(if episodes >= 2 {
            convergence_time(&out.policy_trace, cfg.metrics.convergence_delta)?
        } else {
            crate::metrics::Convergence::Never
        });
        if n >= 2 {
            record.measured_alignment =
                Some(measured_alignment(&rewards, &cfg.env, cfg.metrics.alignment_samples, &mut rng)?);
        }
        Ok(out.policy_trace.last().cloned().unwrap_or_default())
    })();
    match outcome {
        Ok(policy) => RunOutput {
            record,
            final_policy: Some(policy),
        },
        Err(e) => {
            record.reward_gap = None;
            record.convergence_time = None;
            record.pareto_inefficiency = None;
            record.measured_alignment = None;
            record.error = Some(e.to_string());
            RunOutput {
                record,
                final_policy: None,
            }
        }
    }
}

/// Run every condition and replication on `workers` threads. Records come
/// back ordered by condition, then replication, whatever the thread count.
/// Policy variance is computed per condition over its successful runs.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<MetricsRecord>> {
    cfg.validate()?;
    let probes = ProbeGrid::new(&cfg.env, cfg.metrics.probe_points)?;
    let reps = cfg.design.replications;
    let jobs: Vec<(usize, usize)> = (0..cfg.design.condition_count())
        .flat_map(|c| (0..reps).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| config(format!("thread pool: {e}")))?;
    let outputs: Vec<RunOutput> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| run_one(cfg, &probes, c, r))
            .collect()
    });
    let mut records = Vec::with_capacity(outputs.len());
    for group in outputs.chunks(reps) {
        let policies: Vec<Vec<f64>> = group.iter().filter_map(|o| o.final_policy.clone()).collect();
        let variance = policy_variance(&policies).ok();
        for o in group {
            let mut rec = o.record.clone();
            if !rec.failed() {
                rec.policy_variance = variance;
            }
            records.push(rec);
        }
    }
    Ok(records)
}
