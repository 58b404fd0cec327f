//! Friction proxies computed from training output.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, RewardParams};
use crate::error::{config, MarlError, Result};

/// Reward-maximizing state of the cooperative problem, clamped to the box.
/// Resources with no total weight take the capacity midpoint and are listed
/// in the second return value.
pub fn optimum_state(rewards: &RewardParams, cfg: &EnvConfig) -> (Vec<f64>, Vec<usize>) {
    weighted_optimum(rewards, cfg, &vec![1.0; rewards.agents()])
}

/// Maximizer of `sum_i lambda_i R_i` over the capacity box.
fn weighted_optimum(rewards: &RewardParams, cfg: &EnvConfig, lambda: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut degenerate = Vec::new();
    let state = (0..rewards.resources())
        .map(|j| {
            let (mut num, mut den) = (0.0, 0.0);
            for (i, l) in lambda.iter().enumerate() {
                let w = l * rewards.weights()[i][j];
                num += w * rewards.targets()[i][j];
                den += w;
            }
            let c = cfg.capacity[j];
            if den > 0.0 {
                (num / den).clamp(0.0, c)
            } else {
                degenerate.push(j);
                c / 2.0
            }
        })
        .collect();
    (state, degenerate)
}

/// Mean per-agent reward at the cooperative optimum.
pub fn optimal_reward(rewards: &RewardParams, cfg: &EnvConfig) -> f64 {
    let (s, _) = optimum_state(rewards, cfg);
    rewards.rewards(&s).iter().sum::<f64>() / rewards.agents() as f64
}

/// Optimal mean reward minus the mean of the supplied per-episode rewards.
pub fn reward_gap(reward_trace: &[f64], rewards: &RewardParams, cfg: &EnvConfig) -> Result<f64> {
    if reward_trace.is_empty() {
        return Err(MarlError::Metric("reward gap of an empty trace".into()));
    }
    let realized = reward_trace.iter().sum::<f64>() / reward_trace.len() as f64;
    Ok(optimal_reward(rewards, cfg) - realized)
}

/// Episode after which the greedy policy stopped changing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Convergence {
    Episode(usize),
    Never,
}

impl Convergence {
    /// Episode count, with `Never` mapped to `horizon`.
    pub fn or_horizon(self, horizon: usize) -> usize {
        match self {
            Self::Episode(e) => e,
            Self::Never => horizon,
        }
    }
}

impl fmt::Display for Convergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Episode(e) => write!(f, "{e}"),
            Self::Never => f.write_str("never"),
        }
    }
}

impl FromStr for Convergence {
    type Err = MarlError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "never" {
            return Ok(Self::Never);
        }
        match s.parse::<usize>() {
            Ok(e) if e > 0 => Ok(Self::Episode(e)),
            _ => Err(MarlError::Metric(format!("bad convergence time {s:?}"))),
        }
    }
}

impl TryFrom<String> for Convergence {
    type Error = MarlError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Convergence> for String {
    fn from(c: Convergence) -> Self {
        c.to_string()
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(MarlError::Metric(format!(
            "policy encodings differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs())))
}

/// Smallest `e >= 1` such that every later step `pi_k - pi_{k-1}`, `k >= e`,
/// has max-norm below `delta`.
pub fn convergence_time(policy_trace: &[Vec<f64>], delta: f64) -> Result<Convergence> {
    if policy_trace.len() < 2 {
        return Err(MarlError::Metric("convergence needs at least two snapshots".into()));
    }
    let mut first_stable = None;
    for e in 1..policy_trace.len() {
        if max_abs_diff(&policy_trace[e], &policy_trace[e - 1])? < delta {
            first_stable.get_or_insert(e);
        } else {
            first_stable = None;
        }
    }
    Ok(first_stable.map_or(Convergence::Never, Convergence::Episode))
}

/// Mean squared distance of each policy encoding from their mean.
pub fn policy_variance(policies: &[Vec<f64>]) -> Result<f64> {
    if policies.len() < 2 {
        return Err(MarlError::Metric("policy variance needs at least two replications".into()));
    }
    let d = policies[0].len();
    if policies.iter().any(|p| p.len() != d) {
        return Err(MarlError::Metric("mismatched policy encodings".into()));
    }
    let k = policies.len() as f64;
    let mean: Vec<f64> = (0..d).map(|c| policies.iter().map(|p| p[c]).sum::<f64>() / k).collect();
    Ok(policies
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(x, m)| (x - m).powi(2)).sum::<f64>())
        .sum::<f64>()
        / k)
}

/// Compositions of `total` into `parts` non-negative integers.
fn simplex_grid(parts: usize, total: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            simplex_grid(parts - 1, total - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Per-agent rewards at the optima of scalarizations `sum_i lambda_i R_i`
/// for `lambda` on a regular simplex grid.
pub fn pareto_frontier(rewards: &RewardParams, cfg: &EnvConfig) -> Vec<Vec<f64>> {
    let n = rewards.agents();
    let resolution = match n {
        1 => 1,
        2 => 200,
        3 => 60,
        4 => 24,
        _ => 10,
    };
    let (fallback, _) = optimum_state(rewards, cfg);
    simplex_grid(n, resolution)
        .into_iter()
        .map(|counts| {
            let lambda: Vec<f64> = counts.iter().map(|&c| c as f64 / resolution as f64).collect();
            let (mut s, idle) = weighted_optimum(rewards, cfg, &lambda);
            for j in idle {
                s[j] = fallback[j];
            }
            rewards.rewards(&s)
        })
        .collect()
}

/// Euclidean distance from `realized` to the nearest frontier sample.
pub fn pareto_inefficiency(realized: &[f64], rewards: &RewardParams, cfg: &EnvConfig) -> Result<f64> {
    if realized.len() != rewards.agents() {
        return Err(MarlError::Metric(format!(
            "{} realized rewards for {} agents",
            realized.len(),
            rewards.agents()
        )));
    }
    pareto_frontier(rewards, cfg)
        .iter()
        .map(|f| f.iter().zip(realized).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .reduce(f64::min)
        .ok_or_else(|| MarlError::Metric("empty Pareto frontier sample".into()))
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MarlError::UndefinedCorrelation("zero reward variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Mean pairwise Pearson correlation of agent rewards over uniformly sampled states.
pub fn measured_alignment<R: Rng>(rewards: &RewardParams, cfg: &EnvConfig, samples: usize, rng: &mut R) -> Result<f64> {
    let n = rewards.agents();
    if n < 2 {
        return Err(config("alignment needs at least two agents"));
    }
    if samples < 2 {
        return Err(config("alignment needs at least two samples"));
    }
    let mut per_agent = vec![Vec::with_capacity(samples); n];
    for _ in 0..samples {
        let s: Vec<f64> = cfg.capacity.iter().map(|&c| rng.random_range(0.0..=c)).collect();
        for (i, r) in rewards.rewards(&s).into_iter().enumerate() {
            per_agent[i].push(r);
        }
    }
    let mut total = 0.0;
    let mut pairs = 0;
    for i in 0..n {
        for j in i + 1..n {
            total += pearson(&per_agent[i], &per_agent[j])?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}
