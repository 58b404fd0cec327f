//! Friction and legitimacy along exogenous parameter paths.

use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, check_range, Error, Result};
use crate::kernel::{friction, friction_partials, legitimacy, DelegationDomain, KernelTriple, Stakeholder};

/// Slack for sample-to-sample monotonicity checks.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Piecewise-linear function given by `(time, value)` knots. Constant before
/// the first knot and after the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for PiecewiseLinear {
    type Error = Error;

    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PiecewiseLinear> for Vec<(f64, f64)> {
    fn from(p: PiecewiseLinear) -> Self {
        p.knots
    }
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Degenerate("path needs at least one breakpoint".into()));
        }
        for (i, &(t, v)) in knots.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::Invalid(format!("breakpoint {i} is not finite")));
            }
            if i > 0 && t <= knots[i - 1].0 {
                return Err(Error::Invalid(format!(
                    "breakpoint times must be strictly increasing (index {i})"
                )));
            }
        }
        Ok(Self { knots })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            knots: vec![(0.0, value)],
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Index of the segment `[t_k, t_{k+1})` containing `t`, if any.
    fn segment(&self, t: f64) -> Option<usize> {
        if t < self.knots[0].0 {
            return None;
        }
        let k = self.knots.partition_point(|&(tk, _)| tk <= t) - 1;
        (k + 1 < self.knots.len()).then_some(k)
    }

    pub fn value(&self, t: f64) -> f64 {
        let last = self.knots[self.knots.len() - 1];
        if t < self.knots[0].0 {
            return self.knots[0].1;
        }
        match self.segment(t) {
            Some(k) => {
                let (t0, v0) = self.knots[k];
                let (t1, v1) = self.knots[k + 1];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
            None => last.1,
        }
    }

    /// Right derivative at `t`.
    pub fn slope(&self, t: f64) -> f64 {
        self.segment(t).map_or(0.0, |k| self.segment_slope(k))
    }

    fn segment_slope(&self, k: usize) -> f64 {
        let (t0, v0) = self.knots[k];
        let (t1, v1) = self.knots[k + 1];
        (v1 - v0) / (t1 - t0)
    }

    /// `(start, end, slope)` of every segment.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.knots.len().saturating_sub(1))
            .map(|k| (self.knots[k].0, self.knots[k + 1].0, self.segment_slope(k)))
    }
}

/// Time derivatives of the kernel triple.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TripleRates {
    pub d_sigma: f64,
    pub d_alpha: f64,
    pub d_epsilon: f64,
}

/// Paths of stake, alignment and entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPath")]
pub struct ParameterPath {
    sigma: PiecewiseLinear,
    alpha: PiecewiseLinear,
    epsilon: PiecewiseLinear,
}

#[derive(Deserialize)]
struct RawPath {
    sigma: PiecewiseLinear,
    alpha: PiecewiseLinear,
    epsilon: PiecewiseLinear,
}

impl TryFrom<RawPath> for ParameterPath {
    type Error = Error;

    fn try_from(r: RawPath) -> Result<Self> {
        Self::new(r.sigma, r.alpha, r.epsilon)
    }
}

impl ParameterPath {
    pub fn new(sigma: PiecewiseLinear, alpha: PiecewiseLinear, epsilon: PiecewiseLinear) -> Result<Self> {
        for &(_, s) in sigma.knots() {
            check_nonneg("sigma", s)?;
        }
        for &(_, a) in alpha.knots() {
            if !(a > -1.0 && a <= 1.0) {
                return Err(Error::OutOfRange {
                    name: "alpha",
                    value: a,
                    range: "(-1, 1]",
                });
            }
        }
        for &(_, e) in epsilon.knots() {
            check_range("epsilon", e, 0.0, 1.0, "[0, 1]")?;
        }
        Ok(Self { sigma, alpha, epsilon })
    }

    pub fn triple_at(&self, t: f64) -> Result<KernelTriple> {
        KernelTriple::new(
            self.alpha.value(t).clamp(-1.0, 1.0),
            self.sigma.value(t).max(0.0),
            self.epsilon.value(t).clamp(0.0, 1.0),
        )
    }

    pub fn rates_at(&self, t: f64) -> TripleRates {
        TripleRates {
            d_sigma: self.sigma.slope(t),
            d_alpha: self.alpha.slope(t),
            d_epsilon: self.epsilon.slope(t),
        }
    }

    pub fn friction_at(&self, t: f64) -> Result<f64> {
        friction(&self.triple_at(t)?)
    }
}

/// `dF/dt` by the chain rule.
pub fn friction_rate(k: &KernelTriple, rates: &TripleRates) -> Result<f64> {
    Ok(friction_partials(k)?.dot(rates.d_sigma, rates.d_alpha, rates.d_epsilon))
}

/// Zero exactly when friction is stationary; the sign gives the drift direction.
pub fn equilibrium_residual(k: &KernelTriple, rates: &TripleRates) -> Result<f64> {
    friction_rate(k, rates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovCondition {
    StakeBounded,
    AlignmentNonDecreasing,
    EntropyNonIncreasing,
    FrictionNonIncreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: LyapunovCondition,
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub conditions_hold: bool,
    /// Set only when the conditions hold and stake is constant.
    pub friction_monotone: Option<bool>,
    pub violations: Vec<Violation>,
    pub samples: Vec<(f64, f64)>,
}

/// Check the stability conditions on `[0, horizon]`: bounded stake,
/// non-decreasing alignment and non-increasing entropy. Slopes are checked
/// per segment, so short segments between samples are not missed.
pub fn lyapunov_check(path: &ParameterPath, horizon: f64, samples: usize, sigma_max: f64) -> Result<LyapunovReport> {
    if samples < 2 {
        return Err(Error::Invalid("lyapunov check needs at least 2 samples".into()));
    }
    check_nonneg("horizon", horizon)?;
    let mut violations = Vec::new();

    let times: Vec<f64> = (0..samples)
        .map(|i| horizon * i as f64 / (samples - 1) as f64)
        .collect();
    let in_window = |start: f64, end: f64| end > 0.0 && start < horizon;

    let knot_times = path.sigma.knots().iter().map(|k| k.0).filter(|&t| (0.0..=horizon).contains(&t));
    for t in times.iter().copied().chain(knot_times) {
        let s = path.sigma.value(t);
        if s > sigma_max {
            violations.push(Violation {
                condition: LyapunovCondition::StakeBounded,
                time: t,
                value: s,
            });
        }
    }
    for (start, end, slope) in path.alpha.segments() {
        if in_window(start, end) && slope < 0.0 {
            violations.push(Violation {
                condition: LyapunovCondition::AlignmentNonDecreasing,
                time: start.max(0.0),
                value: slope,
            });
        }
    }
    for (start, end, slope) in path.epsilon.segments() {
        if in_window(start, end) && slope > 0.0 {
            violations.push(Violation {
                condition: LyapunovCondition::EntropyNonIncreasing,
                time: start.max(0.0),
                value: slope,
            });
        }
    }
    let conditions_hold = violations.is_empty();
    let stake_constant = path
        .sigma
        .segments()
        .all(|(start, end, slope)| !in_window(start, end) || slope == 0.0);

    let samples_f = times
        .iter()
        .map(|&t| Ok((t, path.friction_at(t)?)))
        .collect::<Result<Vec<_>>>()?;

    let friction_monotone = if conditions_hold && stake_constant {
        let mut monotone = true;
        for w in samples_f.windows(2) {
            if w[1].1 > w[0].1 + MONOTONE_SLACK {
                monotone = false;
                violations.push(Violation {
                    condition: LyapunovCondition::FrictionNonIncreasing,
                    time: w[1].0,
                    value: w[1].1 - w[0].1,
                });
            }
        }
        Some(monotone)
    } else {
        None
    };

    Ok(LyapunovReport {
        conditions_hold,
        friction_monotone,
        violations,
        samples: samples_f,
    })
}

/// `dL/dt` from voice and stake rates.
pub fn legitimacy_rate(d: &DelegationDomain, voice_rates: &[f64], stake_rates: &[f64]) -> Result<f64> {
    let n = d.stakeholders().len();
    for (what, got) in [("voice rates", voice_rates.len()), ("stake rates", stake_rates.len())] {
        if got != n {
            return Err(Error::Dimension { what, expected: n, got });
        }
    }
    let l = legitimacy(d)?;
    let total = d.total_stake();
    Ok(d.stakeholders()
        .iter()
        .zip(voice_rates.iter().zip(stake_rates))
        .map(|(s, (dv, ds))| s.stake() / total * dv + (s.voice() - l) / total * ds)
        .sum())
}

/// Stake and voice paths of each stakeholder in a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiceStakePath {
    pub stakes: Vec<PiecewiseLinear>,
    pub voices: Vec<PiecewiseLinear>,
}

impl VoiceStakePath {
    pub fn validate(&self) -> Result<()> {
        if self.stakes.len() != self.voices.len() {
            return Err(Error::Dimension {
                what: "voice paths",
                expected: self.stakes.len(),
                got: self.voices.len(),
            });
        }
        for p in &self.stakes {
            for &(_, s) in p.knots() {
                check_nonneg("stake", s)?;
            }
        }
        for p in &self.voices {
            for &(_, v) in p.knots() {
                check_range("voice", v, 0.0, 1.0, "[0, 1]")?;
            }
        }
        Ok(())
    }

    /// Domain snapshot at time `t`; alignment, entropy and consent are not tracked.
    pub fn domain_at(&self, t: f64) -> Result<DelegationDomain> {
        self.validate()?;
        let members = self
            .stakes
            .iter()
            .zip(&self.voices)
            .enumerate()
            .map(|(i, (s, v))| Stakeholder::new(i.to_string(), s.value(t).max(0.0), 0.0, 0.0, v.value(t).clamp(0.0, 1.0), true))
            .collect::<Result<Vec<_>>>()?;
        Ok(DelegationDomain::new(members))
    }

    pub fn legitimacy_rate_at(&self, t: f64) -> Result<f64> {
        let d = self.domain_at(t)?;
        let dv: Vec<f64> = self.voices.iter().map(|p| p.slope(t)).collect();
        let ds: Vec<f64> = self.stakes.iter().map(|p| p.slope(t)).collect();
        legitimacy_rate(&d, &dv, &ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn kt(sigma: f64, alpha: f64, epsilon: f64) -> KernelTriple {
        KernelTriple::new(alpha, sigma, epsilon).unwrap()
    }

    fn pl(knots: &[(f64, f64)]) -> PiecewiseLinear {
        PiecewiseLinear::new(knots.to_vec()).unwrap()
    }

    #[test]
    fn piecewise_linear_evaluation() {
        let p = pl(&[(0.0, 0.0), (1.0, 2.0), (3.0, 0.0)]);
        assert_eq!(p.value(-1.0), 0.0);
        assert_eq!(p.value(0.5), 1.0);
        assert_eq!(p.value(2.0), 1.0);
        assert_eq!(p.value(10.0), 0.0);
        assert_eq!(p.slope(0.5), 2.0);
        assert_eq!(p.slope(1.0), -1.0);
        assert_eq!(p.slope(3.0), 0.0);
        assert!(PiecewiseLinear::new(vec![(1.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(PiecewiseLinear::new(vec![]).is_err());
    }

    #[test]
    fn friction_rate_examples() {
        let k = kt(1.0, 0.0, 0.0);
        assert_eq!(friction_rate(&k, &TripleRates::default()).unwrap(), 0.0);
        let r = TripleRates {
            d_alpha: 0.1,
            ..Default::default()
        };
        assert_relative_eq!(friction_rate(&k, &r).unwrap(), -0.1, max_relative = 1e-12);
        assert!(friction_rate(&kt(1.0, -1.0, 0.0), &r).is_err());
    }

    #[test]
    fn equilibrium_examples() {
        let k = kt(1.0, 0.0, 0.0);
        assert_eq!(equilibrium_residual(&k, &TripleRates::default()).unwrap(), 0.0);
        let offset = TripleRates {
            d_sigma: 0.3,
            d_alpha: 0.3,
            d_epsilon: 0.0,
        };
        assert_eq!(equilibrium_residual(&k, &offset).unwrap(), 0.0);
        let entropy_up = TripleRates {
            d_epsilon: 0.2,
            ..Default::default()
        };
        assert!(equilibrium_residual(&kt(2.0, 0.5, 0.1), &entropy_up).unwrap() > 0.0);
    }

    #[test]
    fn lyapunov_constant_path() {
        let path = ParameterPath::new(
            PiecewiseLinear::constant(1.0),
            PiecewiseLinear::constant(0.2),
            PiecewiseLinear::constant(0.5),
        )
        .unwrap();
        let r = lyapunov_check(&path, 10.0, 11, 2.0).unwrap();
        assert!(r.conditions_hold);
        assert_eq!(r.friction_monotone, Some(true));
        let f0 = r.samples[0].1;
        assert!(r.samples.iter().all(|(_, f)| *f == f0));
    }

    #[test]
    fn lyapunov_improving_path() {
        let path = ParameterPath::new(
            PiecewiseLinear::constant(1.0),
            pl(&[(0.0, -0.5), (5.0, 0.5), (10.0, 0.9)]),
            pl(&[(0.0, 1.0), (10.0, 0.0)]),
        )
        .unwrap();
        let r = lyapunov_check(&path, 10.0, 101, 1.0).unwrap();
        assert!(r.conditions_hold, "{:?}", r.violations);
        assert_eq!(r.friction_monotone, Some(true));
        assert!(r.samples.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn lyapunov_reports_entropy_violation() {
        let path = ParameterPath::new(
            PiecewiseLinear::constant(1.0),
            PiecewiseLinear::constant(0.0),
            pl(&[(0.0, 0.5), (2.0, 0.3), (3.0, 0.9), (10.0, 0.9)]),
        )
        .unwrap();
        let r = lyapunov_check(&path, 10.0, 11, 1.0).unwrap();
        assert!(!r.conditions_hold);
        assert_eq!(r.friction_monotone, None);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].condition, LyapunovCondition::EntropyNonIncreasing);
        assert_eq!(r.violations[0].time, 2.0);
    }

    #[test]
    fn lyapunov_reports_stake_bound() {
        let path = ParameterPath::new(
            pl(&[(0.0, 1.0), (0.5, 3.0), (0.6, 1.0)]),
            PiecewiseLinear::constant(0.0),
            PiecewiseLinear::constant(0.0),
        )
        .unwrap();
        let r = lyapunov_check(&path, 10.0, 3, 2.0).unwrap();
        assert!(r
            .violations
            .iter()
            .any(|v| v.condition == LyapunovCondition::StakeBounded && v.time == 0.5));
        assert!(lyapunov_check(&path, 10.0, 1, 2.0).is_err());
    }

    #[test]
    fn path_rejects_pole() {
        assert!(ParameterPath::new(
            PiecewiseLinear::constant(1.0),
            PiecewiseLinear::constant(-1.0),
            PiecewiseLinear::constant(0.0)
        )
        .is_err());
    }

    #[test]
    fn legitimacy_rate_examples() {
        let d = DelegationDomain::new(vec![
            Stakeholder::new("a", 1.0, 0.0, 0.0, 1.0, true).unwrap(),
            Stakeholder::new("b", 1.0, 0.0, 0.0, 0.0, true).unwrap(),
        ]);
        assert_eq!(legitimacy_rate(&d, &[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(legitimacy_rate(&d, &[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.25);
        assert!(legitimacy_rate(&d, &[0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn voice_stake_path_rate() {
        let vs = VoiceStakePath {
            stakes: vec![pl(&[(0.0, 1.0), (1.0, 2.0)]), PiecewiseLinear::constant(1.0)],
            voices: vec![PiecewiseLinear::constant(1.0), PiecewiseLinear::constant(0.0)],
        };
        assert_eq!(vs.legitimacy_rate_at(0.0).unwrap(), 0.25);
    }
}
