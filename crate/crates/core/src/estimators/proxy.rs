use serde::{Deserialize, Serialize};

use super::{mean, nonempty};
use crate::error::{check_range, Error, Result};

/// Time-indexed returns. Timestamps are strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeries")]
pub struct ReturnSeries {
    timestamps: Vec<f64>,
    returns: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSeries {
    timestamps: Vec<f64>,
    returns: Vec<f64>,
}

impl TryFrom<RawSeries> for ReturnSeries {
    type Error = Error;

    fn try_from(r: RawSeries) -> Result<Self> {
        Self::new(r.timestamps, r.returns)
    }
}

impl ReturnSeries {
    pub fn new(timestamps: Vec<f64>, returns: Vec<f64>) -> Result<Self> {
        if timestamps.len() != returns.len() {
            return Err(Error::Dimension {
                what: "returns",
                expected: timestamps.len(),
                got: returns.len(),
            });
        }
        nonempty("timestamps", &timestamps)?;
        nonempty("returns", &returns)?;
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(format!(
                "timestamps must be strictly increasing (index {})",
                i + 1
            )));
        }
        Ok(Self {
            timestamps,
            returns,
        })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    /// Sample standard deviation of returns with timestamps in `[start, end)`.
    pub fn volatility(&self, start: f64, end: f64) -> Result<f64> {
        let window: Vec<f64> = self
            .timestamps
            .iter()
            .zip(&self.returns)
            .filter(|(&t, _)| t >= start && t < end)
            .map(|(_, &r)| r)
            .collect();
        if window.len() < 2 {
            return Err(Error::Degenerate(format!(
                "window [{start}, {end}) holds {} returns, need at least 2",
                window.len()
            )));
        }
        let m = mean(&window);
        let ss: f64 = window.iter().map(|r| (r - m).powi(2)).sum();
        Ok((ss / (window.len() - 1) as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VolatilityInput {
    Ratio {
        realized: f64,
        baseline: f64,
    },
    Series {
        series: ReturnSeries,
        baseline_window: (f64, f64),
        event_window: (f64, f64),
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ProxyInput {
    /// Realized over baseline volatility.
    Volatility(VolatilityInput),
    /// Weighted index of instability components, each in `[0, 1]`.
    Institutional {
        components: Vec<f64>,
        weights: Vec<f64>,
    },
    /// Shortfall of achieved relative to optimal aggregate reward.
    Coordination { achieved: f64, optimal: f64 },
    /// Share of total resources spent on coordination.
    Overhead { coordination: f64, total: f64 },
}

pub fn estimate_friction_proxy(input: &ProxyInput) -> Result<f64> {
    match input {
        ProxyInput::Volatility(v) => {
            let (realized, baseline) = match v {
                VolatilityInput::Ratio { realized, baseline } => (*realized, *baseline),
                VolatilityInput::Series {
                    series,
                    baseline_window,
                    event_window,
                } => (
                    series.volatility(event_window.0, event_window.1)?,
                    series.volatility(baseline_window.0, baseline_window.1)?,
                ),
            };
            if !(baseline > 0.0) {
                return Err(Error::Undefined("volatility ratio with zero baseline"));
            }
            if !(realized >= 0.0) {
                return Err(Error::Invalid(format!("realized volatility {realized} < 0")));
            }
            Ok(realized / baseline)
        }
        ProxyInput::Institutional {
            components,
            weights,
        } => {
            nonempty("components", components)?;
            if components.len() != weights.len() {
                return Err(Error::Dimension {
                    what: "institutional weights",
                    expected: components.len(),
                    got: weights.len(),
                });
            }
            for (&c, &w) in components.iter().zip(weights) {
                check_range("component", c, 0.0, 1.0, "[0, 1]")?;
                check_range("weight", w, 0.0, 1.0, "[0, 1]")?;
            }
            if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::Invalid("institutional weights must sum to 1".into()));
            }
            Ok(components.iter().zip(weights).map(|(c, w)| c * w).sum())
        }
        ProxyInput::Coordination { achieved, optimal } => {
            if *optimal == 0.0 || !optimal.is_finite() {
                return Err(Error::Undefined("coordination ratio with zero optimum"));
            }
            Ok(1.0 - achieved / optimal)
        }
        ProxyInput::Overhead {
            coordination,
            total,
        } => {
            if !(*total > 0.0) {
                return Err(Error::Undefined("overhead ratio with zero total"));
            }
            if !(*coordination >= 0.0) {
                return Err(Error::Invalid("coordination cost must be non-negative".into()));
            }
            Ok(coordination / total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn volatility_ratio() {
        let v = ProxyInput::Volatility(VolatilityInput::Ratio {
            realized: 5.7,
            baseline: 1.0,
        });
        assert_eq!(estimate_friction_proxy(&v).unwrap(), 5.7);
        let zero = ProxyInput::Volatility(VolatilityInput::Ratio {
            realized: 1.0,
            baseline: 0.0,
        });
        assert!(matches!(estimate_friction_proxy(&zero), Err(Error::Undefined(_))));
    }

    #[test]
    fn volatility_from_series() {
        let base = [0.01, -0.02, 0.015, -0.005, 0.0, 0.02];
        let mut returns: Vec<f64> = base.to_vec();
        returns.extend(base.iter().map(|r| r * 3.0));
        let timestamps: Vec<f64> = (0..returns.len()).map(|t| t as f64).collect();
        let v = ProxyInput::Volatility(VolatilityInput::Series {
            series: ReturnSeries::new(timestamps, returns).unwrap(),
            baseline_window: (0.0, 5.0),
            event_window: (6.0, 11.0),
        });
        assert_relative_eq!(estimate_friction_proxy(&v).unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn series_validation() {
        assert!(ReturnSeries::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(ReturnSeries::new(vec![0.0], vec![1.0, 2.0]).is_err());
        let s = ReturnSeries::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(s.volatility(5.0, 6.0).is_err());
    }

    #[test]
    fn institutional() {
        let i = ProxyInput::Institutional {
            components: vec![1.0; 4],
            weights: vec![0.25; 4],
        };
        assert_eq!(estimate_friction_proxy(&i).unwrap(), 1.0);
        let bad = ProxyInput::Institutional {
            components: vec![1.0; 4],
            weights: vec![0.3; 4],
        };
        assert!(estimate_friction_proxy(&bad).is_err());
    }

    #[test]
    fn coordination_and_overhead() {
        let c = ProxyInput::Coordination {
            achieved: 3.0,
            optimal: 3.0,
        };
        assert_eq!(estimate_friction_proxy(&c).unwrap(), 0.0);
        let z = ProxyInput::Coordination {
            achieved: 3.0,
            optimal: 0.0,
        };
        assert!(estimate_friction_proxy(&z).is_err());
        let o = ProxyInput::Overhead {
            coordination: 2.0,
            total: 10.0,
        };
        assert_eq!(estimate_friction_proxy(&o).unwrap(), 0.2);
        let z = ProxyInput::Overhead {
            coordination: 2.0,
            total: 0.0,
        };
        assert!(estimate_friction_proxy(&z).is_err());
    }
}
