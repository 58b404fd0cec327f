use thiserror::Error;

pub type Result<T, E = MarlError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MarlError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed action: {0}")]
    Action(String),
    #[error("target correlation {alpha} is infeasible for {agents} agents (minimum {min})")]
    InfeasibleCorrelation { alpha: f64, agents: usize, min: f64 },
    #[error("training diverged in episode {episode}")]
    Diverged { episode: usize },
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("{0}")]
    Metric(String),
    #[error(transparent)]
    Core(#[from] friction_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn config(msg: impl Into<String>) -> MarlError {
    MarlError::Config(msg.into())
}
