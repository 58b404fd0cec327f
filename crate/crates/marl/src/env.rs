//! Shared-resource environment with clamped mean-request transitions.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config, MarlError, Result};

/// Where each episode starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Fixed(Vec<f64>),
    Rule(StartRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartRule {
    /// Midpoint of the capacity box.
    Center,
    /// Drawn uniformly from the capacity box at the start of every episode.
    Uniform,
}

impl InitialState {
    pub fn center() -> Self {
        Self::Rule(StartRule::Center)
    }

    pub fn uniform() -> Self {
        Self::Rule(StartRule::Uniform)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub n_agents: usize,
    pub m_resources: usize,
    pub capacity: Vec<f64>,
    pub step_size: f64,
    pub episode_length: usize,
    pub initial_state: InitialState,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            n_agents: 2,
            m_resources: 2,
            capacity: vec![2.0; 2],
            step_size: 0.1,
            episode_length: 100,
            initial_state: InitialState::center(),
        }
    }
}

impl EnvConfig {
    pub fn new(n_agents: usize, m_resources: usize) -> Self {
        Self {
            n_agents,
            m_resources,
            capacity: vec![2.0; m_resources],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 1 {
            return Err(config("n_agents must be at least 1"));
        }
        if self.m_resources < 1 {
            return Err(config("m_resources must be at least 1"));
        }
        if self.m_resources > 6 {
            return Err(config("m_resources above 6 makes the joint action space too large"));
        }
        if self.capacity.len() != self.m_resources {
            return Err(config(format!(
                "capacity has {} entries for {} resources",
                self.capacity.len(),
                self.m_resources
            )));
        }
        if let Some(c) = self.capacity.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(config(format!("capacity {c} must be positive")));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(config("step_size must be positive"));
        }
        if self.episode_length == 0 {
            return Err(config("episode_length must be positive"));
        }
        if let InitialState::Fixed(s) = &self.initial_state {
            if s.len() != self.m_resources {
                return Err(config("initial_state length differs from m_resources"));
            }
            for (x, c) in s.iter().zip(&self.capacity) {
                if !(0.0..=*c).contains(x) {
                    return Err(config(format!("initial state {x} outside [0, {c}]")));
                }
            }
        }
        Ok(())
    }

    /// Number of per-agent actions, `3^m`.
    pub fn action_count(&self) -> usize {
        3usize.pow(self.m_resources as u32)
    }

    pub fn reset<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match &self.initial_state {
            InitialState::Fixed(s) => s.clone(),
            InitialState::Rule(StartRule::Center) => self.capacity.iter().map(|c| c / 2.0).collect(),
            InitialState::Rule(StartRule::Uniform) => self.capacity.iter().map(|&c| rng.random_range(0.0..=c)).collect(),
        }
    }
}

/// Per-resource requests in `{-1, 0, +1}` for action index `a`, base-3 with
/// resource 0 as the least significant digit.
pub fn decode_action(mut a: usize, m: usize) -> Vec<i8> {
    (0..m)
        .map(|_| {
            let d = (a % 3) as i8 - 1;
            a /= 3;
            d
        })
        .collect()
}

pub fn encode_action(requests: &[i8]) -> Result<usize> {
    requests.iter().rev().try_fold(0usize, |acc, &r| {
        if (-1..=1).contains(&r) {
            Ok(acc * 3 + (r + 1) as usize)
        } else {
            Err(MarlError::Action(format!("request {r} not in {{-1, 0, 1}}")))
        }
    })
}

/// Per-agent weights `w[i][j]` in `[0, 1]` and targets `tau[i][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    weights: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl RewardParams {
    pub fn new(weights: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != targets.len() {
            return Err(config("weights and targets need the same, non-zero number of agents"));
        }
        let m = weights[0].len();
        for (w, t) in weights.iter().zip(&targets) {
            if w.len() != m || t.len() != m {
                return Err(config("ragged reward matrices"));
            }
            if let Some(x) = w.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(config(format!("weight {x} outside [0, 1]")));
            }
            if t.iter().any(|x| !x.is_finite()) {
                return Err(config("non-finite target"));
            }
        }
        Ok(Self { weights, targets })
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    pub fn agents(&self) -> usize {
        self.weights.len()
    }

    pub fn resources(&self) -> usize {
        self.weights[0].len()
    }

    /// `R_i(s) = -sum_j w_ij (s_j - tau_ij)^2`.
    pub fn reward(&self, agent: usize, state: &[f64]) -> f64 {
        self.weights[agent]
            .iter()
            .zip(&self.targets[agent])
            .zip(state)
            .map(|((w, t), s)| -w * (s - t).powi(2))
            .sum()
    }

    pub fn rewards(&self, state: &[f64]) -> Vec<f64> {
        (0..self.agents()).map(|i| self.reward(i, state)).collect()
    }

    fn check(&self, cfg: &EnvConfig) -> Result<()> {
        if self.agents() != cfg.n_agents || self.resources() != cfg.m_resources {
            return Err(config(format!(
                "reward params are {}x{}, environment is {}x{}",
                self.agents(),
                self.resources(),
                cfg.n_agents,
                cfg.m_resources
            )));
        }
        Ok(())
    }
}

/// Advance one step: every resource moves by `step_size` times the mean
/// request, clamped to its capacity.
pub fn env_step(
    state: &[f64],
    joint_action: &[usize],
    cfg: &EnvConfig,
    rewards: &RewardParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    rewards.check(cfg)?;
    if joint_action.len() != cfg.n_agents {
        return Err(MarlError::Action(format!(
            "{} actions for {} agents",
            joint_action.len(),
            cfg.n_agents
        )));
    }
    if state.len() != cfg.m_resources {
        return Err(config("state length differs from m_resources"));
    }
    let actions = cfg.action_count();
    let mut sum = vec![0i32; cfg.m_resources];
    for &a in joint_action {
        if a >= actions {
            return Err(MarlError::Action(format!("action index {a} >= {actions}")));
        }
        for (acc, r) in sum.iter_mut().zip(decode_action(a, cfg.m_resources)) {
            *acc += i32::from(r);
        }
    }
    let n = cfg.n_agents as f64;
    let next: Vec<f64> = state
        .iter()
        .zip(&sum)
        .zip(&cfg.capacity)
        .map(|((s, &d), &c)| (s + cfg.step_size * f64::from(d) / n).clamp(0.0, c))
        .collect();
    let r = rewards.rewards(&next);
    Ok((next, r))
}

/// Smallest equicorrelation reachable by `n` exchangeable variables.
/// Target standard deviation as a fraction of capacity.
pub const TARGET_SPREAD: f64 = 1.0 / 3.0;

pub fn min_correlation(n: usize) -> f64 {
    if n <= 1 {
        -1.0
    } else {
        -1.0 / (n as f64 - 1.0)
    }
}

/// Target and weight matrices for one experimental condition.
///
/// Raw targets are unit-variance Gaussians with pairwise correlation
/// `alpha_level`. Non-negative levels share a common factor; negative levels
/// use opposite-signed loadings for two agents and a centered mixture for
/// more. Raw targets map to `c/2 + c/3 * raw` on each resource. Weights
/// average `sigma_level` per agent.
pub fn make_rewards<R: Rng>(alpha_level: f64, sigma_level: f64, cfg: &EnvConfig, rng: &mut R) -> Result<RewardParams> {
    cfg.validate()?;
    if !(-1.0..=1.0).contains(&alpha_level) {
        return Err(config(format!("alpha level {alpha_level} outside [-1, 1]")));
    }
    if !(0.0..=1.0).contains(&sigma_level) {
        return Err(config(format!("sigma level {sigma_level} outside [0, 1]")));
    }
    let (n, m) = (cfg.n_agents, cfg.m_resources);
    let min = min_correlation(n);
    if alpha_level < min - 1e-12 {
        return Err(MarlError::InfeasibleCorrelation {
            alpha: alpha_level,
            agents: n,
            min,
        });
    }
    let mut gauss = || -> f64 { StandardNormal.sample(rng) };
    let mut raw = vec![vec![0.0; m]; n];
    for j in 0..m {
        let z = gauss();
        let zeta: Vec<f64> = (0..n).map(|_| gauss()).collect();
        let a = alpha_level.abs();
        if alpha_level >= 0.0 || n == 2 {
            for i in 0..n {
                let sign = if alpha_level < 0.0 && i == 1 { -1.0 } else { 1.0 };
                raw[i][j] = sign * a.sqrt() * z + (1.0 - a).sqrt() * zeta[i];
            }
        } else {
            // y_i = zeta_i - b * mean(zeta) has correlation alpha for this b
            let nf = n as f64;
            let b = 1.0 - (1.0 + alpha_level * nf / (1.0 - alpha_level)).max(0.0).sqrt();
            let var = 1.0 - 2.0 * b / nf + b * b / nf;
            let mean = zeta.iter().sum::<f64>() / nf;
            for i in 0..n {
                raw[i][j] = (zeta[i] - b * mean) / var.sqrt();
            }
        }
    }
    let targets = raw
        .into_iter()
        .map(|row| row.iter().zip(&cfg.capacity).map(|(x, c)| c / 2.0 + c * TARGET_SPREAD * x).collect())
        .collect();
    let weights = (0..n).map(|_| agent_weights(sigma_level, m, rng)).collect();
    RewardParams::new(weights, targets)
}

/// Random weights in `[0, 1]` with mean `sigma` up to rounding.
fn agent_weights<R: Rng>(sigma: f64, m: usize, rng: &mut R) -> Vec<f64> {
    let u: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..1.5)).collect();
    let mean = u.iter().sum::<f64>() / m as f64;
    let dev: Vec<f64> = u.iter().map(|x| sigma * (x / mean - 1.0)).collect();
    // shrink deviations until every weight fits in [0, 1]
    let mut shrink: f64 = 1.0;
    for d in &dev {
        if *d > 0.0 {
            shrink = shrink.min((1.0 - sigma) / d);
        } else if *d < 0.0 {
            shrink = shrink.min(sigma / -d);
        }
    }
    dev.iter().map(|d| (sigma + shrink * d).clamp(0.0, 1.0)).collect()
}

/// State plus independent Gaussian noise with variance `epsilon_level` per dimension.
pub fn observe<R: Rng>(state: &[f64], epsilon_level: f64, rng: &mut R) -> Vec<f64> {
    if epsilon_level <= 0.0 {
        return state.to_vec();
    }
    let sd = epsilon_level.sqrt();
    state
        .iter()
        .map(|s| {
            let z: f64 = StandardNormal.sample(rng);
            s + sd * z
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_resource(n: usize) -> EnvConfig {
        EnvConfig {
            n_agents: n,
            m_resources: 1,
            capacity: vec![2.0],
            initial_state: InitialState::Fixed(vec![1.0]),
            ..EnvConfig::default()
        }
    }

    fn flat(n: usize, m: usize) -> RewardParams {
        RewardParams::new(vec![vec![1.0; m]; n], vec![vec![1.0; m]; n]).unwrap()
    }

    #[test]
    fn action_codec() {
        for a in 0..27 {
            assert_eq!(encode_action(&decode_action(a, 3)).unwrap(), a);
        }
        assert_eq!(decode_action(4, 2), vec![0, 0]);
        assert!(encode_action(&[2]).is_err());
    }

    #[test]
    fn step_examples() {
        let cfg = one_resource(2);
        let stay = encode_action(&[0]).unwrap();
        let up = encode_action(&[1]).unwrap();
        let (s, _) = env_step(&[1.0], &[stay, stay], &cfg, &flat(2, 1)).unwrap();
        assert_eq!(s, vec![1.0]);
        let (s, _) = env_step(&[1.0], &[up, up], &cfg, &flat(2, 1)).unwrap();
        assert!((s[0] - 1.1).abs() < 1e-15);
        let (s, _) = env_step(&[2.0], &[up, up], &cfg, &flat(2, 1)).unwrap();
        assert_eq!(s, vec![2.0]);
        assert!(env_step(&[1.0], &[up], &cfg, &flat(2, 1)).is_err());
        assert!(env_step(&[1.0], &[up, 3], &cfg, &flat(2, 1)).is_err());
    }

    #[test]
    fn rewards_are_negative_squared_error() {
        let r = RewardParams::new(vec![vec![1.0], vec![1.0]], vec![vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(r.rewards(&[1.0]), vec![-1.0, -1.0]);
        assert!(RewardParams::new(vec![vec![1.5]], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn perfect_alignment_gives_identical_targets() {
        let cfg = EnvConfig::new(3, 4);
        let r = make_rewards(1.0, 0.5, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(r.targets()[0], r.targets()[1]);
        assert_eq!(r.targets()[1], r.targets()[2]);
    }

    #[test]
    fn weights_have_exact_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for sigma in [0.0, 0.2, 0.6, 1.0] {
            for m in 1..5 {
                let r = make_rewards(0.0, sigma, &EnvConfig::new(2, m), &mut rng).unwrap();
                for row in r.weights() {
                    assert!(row.iter().all(|w| (0.0..=1.0).contains(w)));
                    assert!((row.iter().sum::<f64>() / m as f64 - sigma).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn infeasible_negative_correlation() {
        let cfg = EnvConfig::new(3, 1);
        let err = make_rewards(-0.8, 0.5, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert!(matches!(err, MarlError::InfeasibleCorrelation { .. }));
        assert!(make_rewards(-0.5, 0.5, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).is_ok());
    }

    #[test]
    fn noiseless_observation_is_exact() {
        let s = vec![0.3, 1.7];
        assert_eq!(observe(&s, 0.0, &mut ChaCha8Rng::seed_from_u64(0)), s);
    }

    #[test]
    fn config_validation() {
        assert!(EnvConfig::default().validate().is_ok());
        let mut bad = EnvConfig::new(2, 2);
        bad.capacity = vec![1.0];
        assert!(bad.validate().is_err());
        bad = one_resource(2);
        bad.initial_state = InitialState::Fixed(vec![3.0]);
        assert!(bad.validate().is_err());
        let parsed: EnvConfig = serde_json::from_str(r#"{"initial_state":"uniform"}"#).unwrap();
        assert_eq!(parsed.initial_state, InitialState::uniform());
        let parsed: EnvConfig = serde_json::from_str(r#"{"initial_state":"center"}"#).unwrap();
        assert_eq!(parsed.reset(&mut ChaCha8Rng::seed_from_u64(0)), vec![1.0, 1.0]);
        let parsed: EnvConfig =
            serde_json::from_str(r#"{"m_resources":1,"capacity":[2.0],"initial_state":[0.5]}"#).unwrap();
        assert_eq!(parsed.initial_state, InitialState::Fixed(vec![0.5]));
    }
}
