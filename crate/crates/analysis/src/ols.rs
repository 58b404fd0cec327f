//! Ordinary least squares with Gaussian information criteria.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};

/// Relative singular-value cutoff for the rank test.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub r_squared: f64,
    pub residual_variance: f64,
    pub rss: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_observations: usize,
    pub residuals: Vec<f64>,
}

/// Least-squares fit of `y` on the columns of `x`.
///
/// `AIC = n ln(RSS/n) + 2k` and `BIC = n ln(RSS/n) + k ln n`, with `RSS/n`
/// floored at the smallest positive normal float so exact fits stay finite.
/// `R^2` is measured against the mean of `y` and clamped to `[0, 1]`.
pub fn fit_ols(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<RegressionResult> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(AnalysisError::Dimension(format!("{} responses for {n} design rows", y.len())));
    }
    if n < k || k == 0 {
        return Err(AnalysisError::TooFew { needed: k.max(1), got: n });
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax).count();
    if rank < k || smax == 0.0 {
        return Err(AnalysisError::Singular { rank, columns: k });
    }
    let beta = svd
        .solve(y, RANK_TOL * smax)
        .map_err(|e| AnalysisError::Dimension(e.to_string()))?;
    let residuals = y - x * &beta;
    let rss = residuals.norm_squared();
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    } else if rss <= f64::EPSILON * y.norm_squared() {
        1.0
    } else {
        0.0
    };
    let dof = n - k;
    let residual_variance = if dof > 0 { rss / dof as f64 } else { 0.0 };
    // (X'X)^-1 = V S^-2 V'
    let v = svd.v_t.as_ref().expect("requested").transpose();
    let std_errors = (0..k)
        .map(|j| {
            let diag: f64 = (0..k)
                .map(|c| v[(j, c)].powi(2) / svd.singular_values[c].powi(2))
                .sum();
            (residual_variance * diag).sqrt()
        })
        .collect();
    let nf = n as f64;
    let ll = nf * (rss / nf).max(f64::MIN_POSITIVE).ln();
    Ok(RegressionResult {
        coefficients: beta.iter().copied().collect(),
        std_errors,
        r_squared,
        residual_variance,
        rss,
        aic: ll + 2.0 * k as f64,
        bic: ll + k as f64 * nf.ln(),
        n_observations: n,
        residuals: residuals.iter().copied().collect(),
    })
}
