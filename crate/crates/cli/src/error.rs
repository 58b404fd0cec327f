use std::path::PathBuf;

use friction_analysis::AnalysisError;
use friction_marl::MarlError;
use serde_json::{json, Value};
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}{}", at(.field), .message)]
    Config {
        file: Option<PathBuf>,
        field: Option<String>,
        message: String,
    },

    #[error("config has no `{0}` block")]
    MissingBlock(&'static str),

    #[error(transparent)]
    Core(#[from] friction_core::Error),

    #[error(transparent)]
    Marl(#[from] MarlError),

    #[error(transparent)]
    Analysis(#[from] AnalysisError),

    #[error("grid is missing {} cell(s): {}", .missing.len(), list_cells(.missing))]
    Grid { missing: Vec<(f64, f64)> },

    #[error("{failed} of {total} runs failed; see the error column")]
    RunsFailed { failed: usize, total: usize },
}

fn at(field: &Option<String>) -> String {
    match field {
        Some(f) if !f.is_empty() && f != "." => format!("{f}: "),
        _ => String::new(),
    }
}

fn list_cells(cells: &[(f64, f64)]) -> String {
    cells.iter().map(|(x, y)| format!("({x}, {y})")).collect::<Vec<_>>().join(", ")
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config {
            file: None,
            field: None,
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Config { .. } | CliError::MissingBlock(_) => "config",
            CliError::Marl(MarlError::Config(_)) => "config",
            CliError::Marl(MarlError::Io(_) | MarlError::Csv(_)) | CliError::Analysis(AnalysisError::Csv(_)) => "io",
            CliError::Grid { .. } => "grid",
            CliError::RunsFailed { .. } => "runs_failed",
            CliError::Core(_) | CliError::Marl(_) | CliError::Analysis(_) => "domain",
        }
    }

    /// 2 for configuration and I/O problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "io" | "config" => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut body = json!({
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::Io { path, .. } => body["path"] = json!(path),
            CliError::Config { file, field, .. } => {
                if let Some(f) = file {
                    body["path"] = json!(f);
                }
                if let Some(f) = field {
                    body["field"] = json!(f);
                }
            }
            CliError::Grid { missing } => body["missing"] = json!(missing),
            _ => {}
        }
        json!({ "error": body })
    }
}
