use thiserror::Error;

pub type Result<T, E = AnalysisError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no usable records")]
    Empty,
    #[error("need at least {needed} records, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("design matrix is rank deficient (rank {rank} < {columns} columns)")]
    Singular { rank: usize, columns: usize },
    #[error("record {row}: {message}")]
    Record { row: usize, message: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Core(#[from] friction_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
