use serde::{Deserialize, Serialize};

use super::nonempty;
use crate::error::{check_positive, Error, Result};

/// Preference or policy position over `k` outcome dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PreferenceVector(Vec<f64>);

impl TryFrom<Vec<f64>> for PreferenceVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PreferenceVector> for Vec<f64> {
    fn from(p: PreferenceVector) -> Self {
        p.0
    }
}

impl PreferenceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        nonempty("preference vector", &values)?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Cosine similarity; both vectors need non-zero norm.
    pub fn cosine(&self, other: &Self) -> Result<f64> {
        if self.0.len() != other.0.len() {
            return Err(Error::Dimension {
                what: "preference vector",
                expected: self.0.len(),
                got: other.0.len(),
            });
        }
        let (na, nb) = (self.norm(), other.norm());
        if na == 0.0 || nb == 0.0 {
            return Err(Error::Degenerate("zero-norm preference vector".into()));
        }
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        Ok((dot / (na * nb)).clamp(-1.0, 1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AlignmentInput {
    /// Cosine between an elicited preference vector and the holder's position.
    Survey {
        individual: PreferenceVector,
        reference: PreferenceVector,
    },
    /// Signed saturating response to a change in holdings.
    Market {
        holding_change: f64,
        sensitivity: f64,
    },
    /// Vote-share weighted cosine between party positions and the government.
    Vote {
        shares: Vec<f64>,
        parties: Vec<PreferenceVector>,
        government: PreferenceVector,
    },
}

pub fn estimate_alignment(input: &AlignmentInput) -> Result<f64> {
    match input {
        AlignmentInput::Survey {
            individual,
            reference,
        } => individual.cosine(reference),
        AlignmentInput::Market {
            holding_change,
            sensitivity,
        } => {
            check_positive("sensitivity", *sensitivity)?;
            if !holding_change.is_finite() {
                return Err(Error::Degenerate("non-finite holding change".into()));
            }
            let magnitude = 1.0 - (-sensitivity * holding_change.abs()).exp();
            Ok(holding_change.signum() * magnitude)
        }
        AlignmentInput::Vote {
            shares,
            parties,
            government,
        } => {
            nonempty("vote shares", shares)?;
            if shares.len() != parties.len() {
                return Err(Error::Dimension {
                    what: "party positions",
                    expected: shares.len(),
                    got: parties.len(),
                });
            }
            if shares.iter().any(|&v| v < 0.0) || (shares.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                return Err(Error::Invalid(
                    "vote shares must be non-negative and sum to 1".into(),
                ));
            }
            let mut total = 0.0;
            for (share, party) in shares.iter().zip(parties) {
                total += share * party.cosine(government)?;
            }
            Ok(total.clamp(-1.0, 1.0))
        }
    }
}
