//! Candidate functional forms and model ranking.

use std::fmt;

use friction_core::{friction, KernelTriple};
use friction_marl::MetricsRecord;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::ols::{fit_ols, RegressionResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// Intercept and `sigma (1 + epsilon) / (1 + alpha)`.
    M1,
    /// Intercept and `sigma + epsilon - alpha`.
    M2,
    /// Intercept and `sigma epsilon (1 - alpha)`.
    M3,
    /// Intercept, `alpha`, `sigma`, `epsilon`.
    M4,
    /// Friction alongside the three factors.
    Full,
}

impl Model {
    pub const CANDIDATES: [Model; 4] = [Model::M1, Model::M2, Model::M3, Model::M4];

    pub fn terms(self) -> &'static [&'static str] {
        match self {
            Model::M1 => &["intercept", "friction"],
            Model::M2 => &["intercept", "additive"],
            Model::M3 => &["intercept", "multiplicative"],
            Model::M4 => &["intercept", "alpha", "sigma", "epsilon"],
            Model::Full => &["intercept", "friction", "alpha", "sigma", "epsilon"],
        }
    }

    fn row(self, a: f64, s: f64, e: f64) -> Result<Vec<f64>> {
        let f = || -> Result<f64> { Ok(friction(&KernelTriple::new(a, s, e)?)?) };
        Ok(match self {
            Model::M1 => vec![1.0, f()?],
            Model::M2 => vec![1.0, s + e - a],
            Model::M3 => vec![1.0, s * e * (1.0 - a)],
            Model::M4 => vec![1.0, a, s, e],
            Model::Full => vec![1.0, f()?, a, s, e],
        })
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Simulation friction proxies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proxy {
    RewardGap,
    ConvergenceTime,
    PolicyVariance,
    ParetoInefficiency,
}

impl Proxy {
    pub const ALL: [Proxy; 4] = [
        Proxy::RewardGap,
        Proxy::ConvergenceTime,
        Proxy::PolicyVariance,
        Proxy::ParetoInefficiency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Proxy::RewardGap => "reward_gap",
            Proxy::ConvergenceTime => "convergence_time",
            Proxy::PolicyVariance => "policy_variance",
            Proxy::ParetoInefficiency => "pareto_inefficiency",
        }
    }

    /// Value of this proxy, with a never-converged run mapped to `horizon`.
    pub fn value(self, r: &MetricsRecord, horizon: usize) -> Option<f64> {
        match self {
            Proxy::RewardGap => r.reward_gap,
            Proxy::ConvergenceTime => r.convergence_time.map(|c| c.or_horizon(horizon) as f64),
            Proxy::PolicyVariance => r.policy_variance,
            Proxy::ParetoInefficiency => r.pareto_inefficiency,
        }
        .filter(|v| v.is_finite())
    }
}

impl fmt::Display for Proxy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn design_matrix(records: &[MetricsRecord], model: Model) -> Result<DMatrix<f64>> {
    if records.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let cols = model.terms().len();
    let mut data = Vec::with_capacity(records.len() * cols);
    for (i, r) in records.iter().enumerate() {
        if r.alpha <= -1.0 {
            return Err(AnalysisError::Record {
                row: i,
                message: "alpha = -1 has no finite friction".into(),
            });
        }
        data.extend(model.row(r.alpha, r.sigma, r.epsilon).map_err(|e| AnalysisError::Record {
            row: i,
            message: e.to_string(),
        })?);
    }
    Ok(DMatrix::from_row_slice(records.len(), cols, &data))
}

/// Records carrying a finite value of `proxy`, with that value.
pub fn usable(records: &[MetricsRecord], proxy: Proxy, horizon: usize) -> (Vec<MetricsRecord>, Vec<f64>) {
    records
        .iter()
        .filter_map(|r| proxy.value(r, horizon).map(|v| (r.clone(), v)))
        .unzip()
}

pub fn fit_model(records: &[MetricsRecord], proxy: Proxy, model: Model, horizon: usize) -> Result<RegressionResult> {
    let (rows, y) = usable(records, proxy, horizon);
    fit_ols(&DVector::from_vec(y), &design_matrix(&rows, model)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model: Model,
    pub rank: usize,
    pub aic: f64,
    pub bic: f64,
    pub delta_aic: f64,
    pub r_squared: f64,
}

/// Fit M1 to M4 on one proxy and rank by AIC, then BIC.
pub fn compare_models(records: &[MetricsRecord], proxy: Proxy, horizon: usize) -> Result<Vec<ModelScore>> {
    let (rows, _) = usable(records, proxy, horizon);
    if rows.len() < 10 {
        return Err(AnalysisError::TooFew { needed: 10, got: rows.len() });
    }
    let mut scores = Model::CANDIDATES
        .iter()
        .map(|&model| {
            let fit = fit_model(&rows, proxy, model, horizon)?;
            Ok(ModelScore {
                model,
                rank: 0,
                aic: fit.aic,
                bic: fit.bic,
                delta_aic: 0.0,
                r_squared: fit.r_squared,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scores.sort_by(|a, b| a.aic.total_cmp(&b.aic).then(a.bic.total_cmp(&b.bic)));
    let best = scores[0].aic;
    for (i, s) in scores.iter_mut().enumerate() {
        s.rank = i + 1;
        s.delta_aic = s.aic - best;
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(alpha: f64, sigma: f64, epsilon: f64, gap: f64) -> MetricsRecord {
        MetricsRecord {
            alpha_index: 0,
            sigma_index: 0,
            epsilon_index: 0,
            replication: 0,
            alpha,
            sigma,
            epsilon,
            seed: 0,
            reward_gap: Some(gap),
            convergence_time: None,
            policy_variance: None,
            pareto_inefficiency: None,
            measured_alignment: None,
            theoretical_friction: 0.0,
            error: None,
        }
    }

    #[test]
    fn features() {
        let r = [record(0.5, 0.6, 0.2, 0.0)];
        let m1 = design_matrix(&r, Model::M1).unwrap();
        assert_eq!(m1[(0, 1)], friction(&KernelTriple::new(0.5, 0.6, 0.2).unwrap()).unwrap());
        let m4 = design_matrix(&r, Model::M4).unwrap();
        assert_eq!(m4.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.5, 0.6, 0.2]);
        let m3 = design_matrix(&[record(0.0, 1.0, 1.0, 0.0)], Model::M3).unwrap();
        assert_eq!(m3[(0, 1)], 1.0);
        assert_eq!(design_matrix(&r, Model::Full).unwrap().ncols(), 5);
        assert!(design_matrix(&[record(-1.0, 1.0, 0.0, 0.0)], Model::M2).is_err());
        assert!(design_matrix(&[], Model::M1).is_err());
    }

    #[test]
    fn failed_runs_are_skipped() {
        let mut bad = record(0.0, 0.5, 0.5, 0.0);
        bad.reward_gap = None;
        let (rows, y) = usable(&[bad, record(0.1, 0.5, 0.5, 2.0)], Proxy::RewardGap, 10);
        assert_eq!(rows.len(), 1);
        assert_eq!(y, vec![2.0]);
    }
}
