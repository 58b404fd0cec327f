use thiserror::Error;

use crate::coarse::LumpabilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Alignment hit the pole of the friction function.
    #[error("friction diverges at alignment -1{}", fmt_who(.stakeholder))]
    Divergence { stakeholder: Option<String> },

    #[error("{name} = {value} is outside its valid range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("{0} is undefined for this input")]
    Undefined(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("non-finite value produced at step {step}")]
    NonFinite { step: usize },

    #[error("mutation kernel is not ergodic: {0}")]
    NotErgodic(String),

    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("partition is not lumpable at the requested tolerance")]
    NotLumpable(Box<LumpabilityReport>),

    #[error("row {row}: {message}")]
    Table { row: usize, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),
}

fn fmt_who(who: &Option<String>) -> String {
    match who {
        Some(id) => format!(" (stakeholder {id})"),
        None => String::new(),
    }
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<f64> {
    check_range(name, value, 0.0, f64::INFINITY, "[0, inf)")
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "(0, inf)",
        })
    }
}
