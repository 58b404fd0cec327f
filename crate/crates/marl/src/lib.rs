//! Multi-agent validation experiment for the friction model.
//!
//! Agents share resources whose levels move with the mean of their requests.
//! Each agent learns independently from its own reward and its own noisy view
//! of the state. [`run_experiment`] crosses alignment, stake and noise levels,
//! trains each cell several times and reports friction proxies per run.

pub mod agent;
pub mod env;
pub mod error;
pub mod metrics;
pub mod mlp;
pub mod record;
pub mod runner;

pub use agent::{train_agents, AgentConfig, Approximator, ProbeGrid, TrainingOutput};
pub use env::{env_step, make_rewards, observe, EnvConfig, InitialState, RewardParams, StartRule, TARGET_SPREAD};
pub use error::{MarlError, Result};
pub use metrics::{
    convergence_time, measured_alignment, pareto_inefficiency, policy_variance, reward_gap, Convergence,
};
pub use record::{read_csv, read_csv_path, to_csv_string, write_csv, MetricsRecord, COLUMNS};
pub use runner::{derive_seed, run_experiment, splitmix64, ExperimentConfig, ExperimentDesign, MetricsConfig};
