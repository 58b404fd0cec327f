use serde::{Deserialize, Serialize};

use super::nonempty;
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-9;

/// Joint distribution over (sent symbol, received symbol) pairs; rows index
/// the sent symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DiscreteJoint {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for DiscreteJoint {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<DiscreteJoint> for Vec<Vec<f64>> {
    fn from(j: DiscreteJoint) -> Self {
        j.rows
    }
}

impl DiscreteJoint {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || width == 0 {
            return Err(Error::Degenerate("empty joint distribution".into()));
        }
        let mut total = 0.0;
        for row in &rows {
            if row.len() != width {
                return Err(Error::Dimension {
                    what: "joint distribution row",
                    expected: width,
                    got: row.len(),
                });
            }
            for &p in row {
                if !(p.is_finite() && p >= 0.0) {
                    return Err(Error::Invalid(format!("joint probability {p} is negative")));
                }
                total += p;
            }
        }
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Invalid(format!(
                "joint distribution sums to {total}, expected 1"
            )));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows[0].len()];
        for row in &self.rows {
            for (acc, p) in out.iter_mut().zip(row) {
                *acc += p;
            }
        }
        out
    }
}

/// Shannon entropy in nats.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// Mutual information `I(X; Y)` in nats.
pub fn mutual_information(joint: &DiscreteJoint) -> f64 {
    let px = joint.marginal_x();
    let py = joint.marginal_y();
    let mut mi = 0.0;
    for (row, &pxi) in joint.rows.iter().zip(&px) {
        for (&pxy, &pyj) in row.iter().zip(&py) {
            if pxy > 0.0 {
                mi += pxy * (pxy / (pxi * pyj)).ln();
            }
        }
    }
    mi.max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EntropyInput {
    /// Divergence of the holder's estimate from the true preference distribution.
    Kl { truth: Vec<f64>, estimate: Vec<f64> },
    /// Fraction of the sender's information lost in transmission.
    Channel { joint: DiscreteJoint },
    /// Mean squared error of estimated preference vectors, one row per agent.
    Misperception {
        truth: Vec<Vec<f64>>,
        estimate: Vec<Vec<f64>>,
    },
}

pub fn estimate_entropy(input: &EntropyInput) -> Result<f64> {
    match input {
        EntropyInput::Kl { truth, estimate } => kl_divergence(truth, estimate),
        EntropyInput::Channel { joint } => {
            let hx = shannon_entropy(&joint.marginal_x());
            if hx <= 0.0 {
                return Err(Error::Undefined("channel entropy of a constant signal"));
            }
            Ok((1.0 - mutual_information(joint) / hx).clamp(0.0, 1.0))
        }
        EntropyInput::Misperception { truth, estimate } => {
            if truth.is_empty() {
                return Err(Error::Degenerate("no agents".into()));
            }
            if truth.len() != estimate.len() {
                return Err(Error::Dimension {
                    what: "misperception rows",
                    expected: truth.len(),
                    got: estimate.len(),
                });
            }
            let mut total = 0.0;
            for (t, e) in truth.iter().zip(estimate) {
                nonempty("preference row", t)?;
                nonempty("estimate row", e)?;
                if t.len() != e.len() {
                    return Err(Error::Dimension {
                        what: "misperception columns",
                        expected: t.len(),
                        got: e.len(),
                    });
                }
                total += t.iter().zip(e).map(|(a, b)| (b - a).powi(2)).sum::<f64>();
            }
            Ok(total / truth.len() as f64)
        }
    }
}

fn kl_divergence(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    nonempty("true distribution", truth)?;
    nonempty("estimated distribution", estimate)?;
    if truth.len() != estimate.len() {
        return Err(Error::Dimension {
            what: "distribution support",
            expected: truth.len(),
            got: estimate.len(),
        });
    }
    for (name, dist) in [("true", truth), ("estimated", estimate)] {
        if dist.iter().any(|&p| p < 0.0) || (dist.iter().sum::<f64>() - 1.0).abs() > SUM_TOL {
            return Err(Error::Invalid(format!(
                "{name} distribution must be non-negative and sum to 1"
            )));
        }
    }
    let mut kl = 0.0;
    for (&p, &q) in truth.iter().zip(estimate) {
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            return Err(Error::Divergence { stakeholder: None });
        }
        kl += p * (p / q).ln();
    }
    Ok(kl.max(0.0))
}
