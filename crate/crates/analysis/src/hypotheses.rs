//! Rank-correlation and regression tests of the directional hypotheses.

use friction_marl::MetricsRecord;
use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::{design_matrix, usable, Model, Proxy};
use crate::ols::fit_ols;

/// Significance level used for the `significant` flag.
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub seed: u64,
    pub permutations: usize,
    /// Value substituted for runs whose policy never settled.
    pub convergence_horizon: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            permutations: 1000,
            convergence_horizon: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Proxies fall as alignment rises.
    H1,
    /// Proxies rise with stake.
    H2,
    /// Proxies rise with entropy.
    H3,
    /// The friction form predicts the proxy.
    H4,
}

impl Hypothesis {
    fn expected_sign(self) -> f64 {
        match self {
            Hypothesis::H1 => -1.0,
            _ => 1.0,
        }
    }

    fn factor(self, r: &MetricsRecord) -> f64 {
        match self {
            Hypothesis::H1 => r.alpha,
            Hypothesis::H2 => r.sigma,
            Hypothesis::H3 => r.epsilon,
            Hypothesis::H4 => r.theoretical_friction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub hypothesis: Hypothesis,
    pub proxy: Proxy,
    pub n: usize,
    /// Spearman correlation for H1 to H3, slope on friction for H4. Absent
    /// when the test is degenerate.
    pub statistic: Option<f64>,
    pub p_value: f64,
    pub direction_satisfied: bool,
    pub significant: bool,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
}

/// Average ranks, ties sharing the mean of their positions (1-based).
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation, `None` when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    pearson(&ranks(x), &ranks(y))
}

/// Two-sided permutation p-value `(1 + #{|T*| >= |T|}) / (1 + shuffles)`,
/// shuffling `y` against a fixed `x`.
pub fn permutation_p<F>(x: &[f64], y: &[f64], observed: f64, shuffles: usize, seed: u64, stat: F) -> f64
where
    F: Fn(&[f64], &[f64]) -> Option<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = y.to_vec();
    let mut extreme = 0usize;
    let threshold = observed.abs() * (1.0 - 1e-12);
    for _ in 0..shuffles {
        shuffled.shuffle(&mut rng);
        if stat(x, &shuffled).is_some_and(|t| t.abs() >= threshold) {
            extreme += 1;
        }
    }
    (1 + extreme) as f64 / (1 + shuffles) as f64
}

fn degenerate(hypothesis: Hypothesis, proxy: Proxy, n: usize) -> HypothesisReport {
    HypothesisReport {
        hypothesis,
        proxy,
        n,
        statistic: None,
        p_value: 1.0,
        direction_satisfied: false,
        significant: false,
        degenerate: true,
        r_squared: None,
    }
}

/// H1 to H3 for every proxy, then H4 for every proxy. Each test draws its
/// shuffles from its own stream derived from `cfg.seed`.
pub fn test_hypotheses(records: &[MetricsRecord], cfg: &AnalysisConfig) -> Result<Vec<HypothesisReport>> {
    let mut out = Vec::new();
    let mut stream = 0u64;
    let mut next_seed = || {
        stream += 1;
        friction_marl::splitmix64(cfg.seed ^ friction_marl::splitmix64(stream))
    };
    for h in [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3] {
        for proxy in Proxy::ALL {
            let seed = next_seed();
            let (rows, y) = usable(records, proxy, cfg.convergence_horizon);
            let x: Vec<f64> = rows.iter().map(|r| h.factor(r)).collect();
            let Some(rho) = spearman(&x, &y) else {
                out.push(degenerate(h, proxy, rows.len()));
                continue;
            };
            let p = permutation_p(&x, &y, rho, cfg.permutations, seed, spearman);
            out.push(HypothesisReport {
                hypothesis: h,
                proxy,
                n: rows.len(),
                statistic: Some(rho),
                p_value: p,
                direction_satisfied: rho * h.expected_sign() > 0.0,
                significant: p < SIGNIFICANCE,
                degenerate: false,
                r_squared: None,
            });
        }
    }
    for proxy in Proxy::ALL {
        let seed = next_seed();
        let (rows, y) = usable(records, proxy, cfg.convergence_horizon);
        let x: Vec<f64> = rows.iter().map(|r| Hypothesis::H4.factor(r)).collect();
        let Ok(design) = design_matrix(&rows, Model::M1) else {
            out.push(degenerate(Hypothesis::H4, proxy, rows.len()));
            continue;
        };
        let slope = |_: &[f64], y: &[f64]| {
            fit_ols(&DVector::from_column_slice(y), &design).ok().map(|f| f.coefficients[1])
        };
        let fit = match fit_ols(&DVector::from_column_slice(&y), &design) {
            Ok(fit) if pearson(&x, &y).is_some() => fit,
            _ => {
                out.push(degenerate(Hypothesis::H4, proxy, rows.len()));
                continue;
            }
        };
        let beta = fit.coefficients[1];
        let p = permutation_p(&x, &y, beta, cfg.permutations, seed, slope);
        out.push(HypothesisReport {
            hypothesis: Hypothesis::H4,
            proxy,
            n: rows.len(),
            statistic: Some(beta),
            p_value: p,
            direction_satisfied: beta > 0.0,
            significant: p < SIGNIFICANCE,
            degenerate: false,
            r_squared: Some(fit.r_squared),
        });
    }
    Ok(out)
}
