//! Statistics over friction experiment records: least-squares fits of the
//! candidate functional forms, AIC/BIC ranking, and permutation tests of the
//! directional hypotheses.

pub mod error;
pub mod hypotheses;
pub mod models;
pub mod ols;
pub mod report;

pub use error::{AnalysisError, Result};
pub use hypotheses::{spearman, test_hypotheses, AnalysisConfig, Hypothesis, HypothesisReport};
pub use models::{compare_models, design_matrix, Model, ModelScore, Proxy};
pub use ols::{fit_ols, RegressionResult};
pub use report::{analyze, coefficients_csv, AnalysisReport};
