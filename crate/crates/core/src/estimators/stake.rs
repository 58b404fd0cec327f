use serde::{Deserialize, Serialize};

use super::nonempty;
use crate::error::{check_nonneg, check_range, Error, Result};

/// Terms of a discounted stake series smaller than this end a perpetual tail.
const TAIL_CUTOFF: f64 = 1e-12;
const MAX_TAIL_TERMS: usize = 1_000_000;

/// Weights of the linear political-stake aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoliticalWeights {
    pub proximity: f64,
    pub reversibility: f64,
    pub magnitude: f64,
}

impl Default for PoliticalWeights {
    fn default() -> Self {
        Self {
            proximity: 0.4,
            reversibility: 0.3,
            magnitude: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StakeInput {
    /// Expected absolute wealth difference between two independent outcomes.
    Monetary {
        wealth: Vec<f64>,
        probabilities: Vec<f64>,
    },
    /// Discounted sum of a stake series. With `perpetual`, the final value
    /// repeats until the discounted terms fall below 1e-12.
    PresentValue {
        stakes: Vec<f64>,
        discount: f64,
        #[serde(default)]
        perpetual: bool,
    },
    /// Loss range of the task times the agent's sensitivity.
    Computational { losses: Vec<f64>, sensitivity: f64 },
    /// Weighted combination of scores in `[0, 1]`; each score raises stake.
    Political {
        proximity: f64,
        reversibility: f64,
        magnitude: f64,
        #[serde(default)]
        weights: PoliticalWeights,
    },
}

pub fn estimate_stake(input: &StakeInput) -> Result<f64> {
    match input {
        StakeInput::Monetary {
            wealth,
            probabilities,
        } => {
            nonempty("wealth outcomes", wealth)?;
            if wealth.len() < 2 {
                return Err(Error::Degenerate(
                    "monetary stake needs at least two outcomes".into(),
                ));
            }
            if probabilities.len() != wealth.len() {
                return Err(Error::Dimension {
                    what: "outcome probabilities",
                    expected: wealth.len(),
                    got: probabilities.len(),
                });
            }
            if probabilities.iter().any(|&p| !(p >= 0.0))
                || (probabilities.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                return Err(Error::Invalid(
                    "outcome probabilities must be non-negative and sum to 1".into(),
                ));
            }
            let mut total = 0.0;
            for (wa, pa) in wealth.iter().zip(probabilities) {
                for (wb, pb) in wealth.iter().zip(probabilities) {
                    total += pa * pb * (wa - wb).abs();
                }
            }
            Ok(total)
        }
        StakeInput::PresentValue {
            stakes,
            discount,
            perpetual,
        } => {
            if !(*discount > 0.0 && *discount < 1.0) {
                return Err(Error::OutOfRange {
                    name: "discount",
                    value: *discount,
                    range: "(0, 1)",
                });
            }
            nonempty("stake series", stakes)?;
            let mut weight = 1.0;
            let mut total = 0.0;
            for &s in stakes {
                check_nonneg("stake", s)?;
                total += weight * s;
                weight *= discount;
            }
            if *perpetual {
                let last = stakes[stakes.len() - 1];
                let mut n = 0;
                while weight * last >= TAIL_CUTOFF && n < MAX_TAIL_TERMS {
                    total += weight * last;
                    weight *= discount;
                    n += 1;
                }
            }
            Ok(total)
        }
        StakeInput::Computational {
            losses,
            sensitivity,
        } => {
            nonempty("losses", losses)?;
            check_nonneg("sensitivity", *sensitivity)?;
            let max = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((max - min) * sensitivity)
        }
        StakeInput::Political {
            proximity,
            reversibility,
            magnitude,
            weights,
        } => {
            let p = check_range("proximity", *proximity, 0.0, 1.0, "[0, 1]")?;
            let r = check_range("reversibility", *reversibility, 0.0, 1.0, "[0, 1]")?;
            let m = check_range("magnitude", *magnitude, 0.0, 1.0, "[0, 1]")?;
            check_nonneg("proximity weight", weights.proximity)?;
            check_nonneg("reversibility weight", weights.reversibility)?;
            check_nonneg("magnitude weight", weights.magnitude)?;
            Ok(weights.proximity * p + weights.reversibility * r + weights.magnitude * m)
        }
    }
}
