//! Independent Q-learning with tabular or neural action values.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{decode_action, env_step, observe, EnvConfig, RewardParams};
use crate::error::{config, MarlError, Result};
use crate::mlp::Mlp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Approximator {
    Mlp { hidden: usize, layers: usize },
    /// Uniform bins per resource over the capacity range.
    Tabular { bins: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub approximator: Approximator,
    pub learn_rate: f64,
    pub discount: f64,
    pub explore_start: f64,
    pub explore_end: f64,
    pub episodes: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            approximator: Approximator::Mlp { hidden: 64, layers: 2 },
            learn_rate: 0.001,
            discount: 0.99,
            explore_start: 0.1,
            explore_end: 0.01,
            episodes: 10_000,
        }
    }
}

impl AgentConfig {
    /// Tabular agents sized for quick sweeps.
    pub fn tabular(bins: usize, episodes: usize) -> Self {
        Self {
            approximator: Approximator::Tabular { bins },
            learn_rate: 0.1,
            discount: 0.9,
            episodes,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.approximator {
            Approximator::Mlp { hidden, layers } if hidden == 0 || layers == 0 => {
                return Err(config("mlp needs at least one hidden layer of non-zero width"))
            }
            Approximator::Tabular { bins: 0 } => return Err(config("tabular bins must be positive")),
            _ => {}
        }
        if !(self.learn_rate.is_finite() && self.learn_rate >= 0.0) {
            return Err(config("learn_rate must be non-negative"));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(config("discount must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.explore_start) || !(0.0..=1.0).contains(&self.explore_end) {
            return Err(config("exploration rates must lie in [0, 1]"));
        }
        if self.explore_end > self.explore_start {
            return Err(config("explore_end must not exceed explore_start"));
        }
        if self.episodes == 0 {
            return Err(config("episodes must be positive"));
        }
        Ok(())
    }

    /// Linear annealing from `explore_start` to `explore_end` over `episodes`.
    pub fn exploration(&self, episode: usize, episodes: usize) -> f64 {
        if episodes <= 1 {
            return self.explore_start;
        }
        let frac = episode as f64 / (episodes - 1) as f64;
        self.explore_start + (self.explore_end - self.explore_start) * frac
    }
}

#[derive(Debug, Clone)]
pub struct TabularQ {
    bins: usize,
    capacity: Vec<f64>,
    actions: usize,
    q: Vec<f64>,
}

impl TabularQ {
    fn new(bins: usize, capacity: &[f64], actions: usize) -> Self {
        let cells = bins.pow(capacity.len() as u32);
        Self {
            bins,
            capacity: capacity.to_vec(),
            actions,
            q: vec![0.0; cells * actions],
        }
    }

    fn cell(&self, obs: &[f64]) -> usize {
        obs.iter().zip(&self.capacity).rev().fold(0, |acc, (o, c)| {
            let b = ((o / c) * self.bins as f64).floor().clamp(0.0, (self.bins - 1) as f64) as usize;
            acc * self.bins + b
        })
    }
}

/// Action-value function of one agent.
#[derive(Debug, Clone)]
pub enum QFunction {
    Tabular(TabularQ),
    Mlp { net: Mlp, capacity: Vec<f64> },
}

impl QFunction {
    pub fn new<R: Rng>(approx: Approximator, env: &EnvConfig, rng: &mut R) -> Self {
        match approx {
            Approximator::Tabular { bins } => Self::Tabular(TabularQ::new(bins, &env.capacity, env.action_count())),
            Approximator::Mlp { hidden, layers } => Self::Mlp {
                net: Mlp::new(env.m_resources, hidden, layers, env.action_count(), rng),
                capacity: env.capacity.clone(),
            },
        }
    }

    fn scaled(capacity: &[f64], obs: &[f64]) -> Vec<f64> {
        obs.iter().zip(capacity).map(|(o, c)| 2.0 * o / c - 1.0).collect()
    }

    pub fn values(&self, obs: &[f64]) -> Vec<f64> {
        match self {
            Self::Tabular(t) => {
                let at = t.cell(obs) * t.actions;
                t.q[at..at + t.actions].to_vec()
            }
            Self::Mlp { net, capacity } => net.forward(&Self::scaled(capacity, obs)),
        }
    }

    fn update(&mut self, obs: &[f64], action: usize, target: f64, lr: f64) {
        match self {
            Self::Tabular(t) => {
                let at = t.cell(obs) * t.actions + action;
                t.q[at] += lr * (target - t.q[at]);
            }
            Self::Mlp { net, capacity } => {
                net.train(&Self::scaled(capacity, obs), action, target, lr);
            }
        }
    }

    /// First action attaining the maximum value.
    pub fn greedy(&self, obs: &[f64]) -> usize {
        argmax(&self.values(obs))
    }

    fn is_finite(&self) -> bool {
        match self {
            Self::Tabular(t) => t.q.iter().all(|x| x.is_finite()),
            Self::Mlp { net, .. } => net.is_finite(),
        }
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Grid of noiseless states on which greedy policies are compared.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    states: Vec<Vec<f64>>,
}

impl ProbeGrid {
    /// `points` evenly spaced values per resource, endpoints included.
    pub fn new(env: &EnvConfig, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(config("probe grid needs at least one point per resource"));
        }
        let axis = |c: f64| -> Vec<f64> {
            if points == 1 {
                vec![c / 2.0]
            } else {
                (0..points).map(|k| c * k as f64 / (points - 1) as f64).collect()
            }
        };
        let mut states = vec![Vec::new()];
        for &c in &env.capacity {
            states = states
                .into_iter()
                .flat_map(|s| {
                    axis(c).into_iter().map(move |x| {
                        let mut next = s.clone();
                        next.push(x);
                        next
                    })
                })
                .collect();
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    /// Greedy requests of every agent at every probe, flattened
    /// agent-major then probe then resource.
    pub fn encode(&self, agents: &[QFunction], m: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(agents.len() * self.states.len() * m);
        for q in agents {
            for s in &self.states {
                out.extend(decode_action(q.greedy(s), m).into_iter().map(f64::from));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainingOutput {
    pub agents: Vec<QFunction>,
    /// Per-episode reward averaged over steps and agents.
    pub reward_trace: Vec<f64>,
    /// Per-episode reward of each agent averaged over steps.
    pub agent_reward_trace: Vec<Vec<f64>>,
    /// Greedy-policy encoding after each episode.
    pub policy_trace: Vec<Vec<f64>>,
}

/// Train one independent learner per agent on its own reward and its own
/// noisy observations. Observation noise has variance `noise` per dimension.
pub fn train_agents<R: Rng>(
    env: &EnvConfig,
    rewards: &RewardParams,
    agents: &AgentConfig,
    noise: f64,
    probes: &ProbeGrid,
    rng: &mut R,
) -> Result<TrainingOutput> {
    env.validate()?;
    agents.validate()?;
    if !(0.0..=1.0).contains(&noise) {
        return Err(config(format!("observation noise {noise} outside [0, 1]")));
    }
    let n = env.n_agents;
    let m = env.m_resources;
    let actions = env.action_count();
    let episodes = agents.episodes;
    let mut q: Vec<QFunction> = (0..n).map(|_| QFunction::new(agents.approximator, env, rng)).collect();

    let mut reward_trace = Vec::with_capacity(episodes);
    let mut agent_reward_trace = Vec::with_capacity(episodes);
    let mut policy_trace = Vec::with_capacity(episodes);
    let mut joint = vec![0usize; n];
    for episode in 0..episodes {
        let explore = agents.exploration(episode, episodes);
        let mut state = env.reset(rng);
        let mut obs: Vec<Vec<f64>> = (0..n).map(|_| observe(&state, noise, rng)).collect();
        let mut totals = vec![0.0; n];
        for t in 0..env.episode_length {
            for (i, a) in joint.iter_mut().enumerate() {
                *a = if rng.random::<f64>() < explore {
                    rng.random_range(0..actions)
                } else {
                    q[i].greedy(&obs[i])
                };
            }
            let (next, r) = env_step(&state, &joint, env, rewards)?;
            let next_obs: Vec<Vec<f64>> = (0..n).map(|_| observe(&next, noise, rng)).collect();
            let terminal = t + 1 == env.episode_length;
            for i in 0..n {
                let bootstrap = if terminal {
                    0.0
                } else {
                    q[i].values(&next_obs[i]).into_iter().fold(f64::NEG_INFINITY, f64::max)
                };
                q[i].update(&obs[i], joint[i], r[i] + agents.discount * bootstrap, agents.learn_rate);
                totals[i] += r[i];
            }
            state = next;
            obs = next_obs;
        }
        if !q.iter().all(QFunction::is_finite) {
            return Err(MarlError::Diverged { episode });
        }
        let per_agent: Vec<f64> = totals.iter().map(|x| x / env.episode_length as f64).collect();
        reward_trace.push(per_agent.iter().sum::<f64>() / n as f64);
        agent_reward_trace.push(per_agent);
        policy_trace.push(probes.encode(&q, m));
    }
    Ok(TrainingOutput {
        agents: q,
        reward_trace,
        agent_reward_trace,
        policy_trace,
    })
}
