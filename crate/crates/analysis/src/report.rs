//! Full analysis of a set of experiment records.

use friction_marl::MetricsRecord;
use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::hypotheses::{test_hypotheses, AnalysisConfig, HypothesisReport};
use crate::models::{compare_models, fit_model, usable, Model, ModelScore, Proxy};
use crate::ols::RegressionResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub proxy: Proxy,
    pub model: Model,
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub residual_variance: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_observations: usize,
}

impl FittedModel {
    fn new(proxy: Proxy, model: Model, fit: RegressionResult) -> Self {
        Self {
            proxy,
            model,
            coefficients: model
                .terms()
                .iter()
                .zip(fit.coefficients.iter().zip(&fit.std_errors))
                .map(|(t, (&estimate, &std_error))| Coefficient {
                    term: (*t).to_string(),
                    estimate,
                    std_error,
                })
                .collect(),
            r_squared: fit.r_squared,
            residual_variance: fit.residual_variance,
            aic: fit.aic,
            bic: fit.bic,
            n_observations: fit.n_observations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyComparison {
    pub proxy: Proxy,
    pub ranking: Vec<ModelScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n_records: usize,
    pub n_failed: usize,
    pub hypotheses: Vec<HypothesisReport>,
    pub comparisons: Vec<ProxyComparison>,
    pub fits: Vec<FittedModel>,
    /// Proxies skipped by model fitting, with the reason.
    pub skipped: Vec<(Proxy, String)>,
}

/// Hypothesis tests, model ranking and fits of every model for every proxy.
/// A proxy whose fits fail is listed in `skipped` instead of aborting.
pub fn analyze(records: &[MetricsRecord], cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    if records.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let hypotheses = test_hypotheses(records, cfg)?;
    let mut comparisons = Vec::new();
    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    for proxy in Proxy::ALL {
        let attempt = || -> Result<(ProxyComparison, Vec<FittedModel>)> {
            let ranking = compare_models(records, proxy, cfg.convergence_horizon)?;
            let fitted = Model::CANDIDATES
                .iter()
                .chain([&Model::Full])
                .map(|&m| Ok(FittedModel::new(proxy, m, fit_model(records, proxy, m, cfg.convergence_horizon)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((ProxyComparison { proxy, ranking }, fitted))
        };
        match attempt() {
            Ok((c, f)) => {
                comparisons.push(c);
                fits.extend(f);
            }
            Err(e) => skipped.push((proxy, e.to_string())),
        }
    }
    Ok(AnalysisReport {
        n_records: records.len(),
        n_failed: records.iter().filter(|r| r.failed()).count(),
        hypotheses,
        comparisons,
        fits,
        skipped,
    })
}

/// Coefficient table with columns `proxy,model,term,estimate,std_error`.
pub fn coefficients_csv(report: &AnalysisReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["proxy", "model", "term", "estimate", "std_error"])?;
    for fit in &report.fits {
        for c in &fit.coefficients {
            w.write_record([
                fit.proxy.name().to_string(),
                fit.model.to_string(),
                c.term.clone(),
                c.estimate.to_string(),
                c.std_error.to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| AnalysisError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

/// Number of records with a usable value for `proxy`.
pub fn usable_count(records: &[MetricsRecord], proxy: Proxy, horizon: usize) -> usize {
    usable(records, proxy, horizon).0.len()
}
