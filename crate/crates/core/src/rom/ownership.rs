use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, check_positive, check_range, Error, Result};
use crate::ode::rk4_step;

/// Rates of the ownership-perception dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct OwnershipParams {
    beta: f64,
    gamma_decay: f64,
    gamma_entrench: f64,
}

#[derive(Deserialize)]
struct RawParams {
    beta: f64,
    gamma_decay: f64,
    gamma_entrench: f64,
}

impl TryFrom<RawParams> for OwnershipParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        Self::new(r.beta, r.gamma_decay, r.gamma_entrench)
    }
}

impl OwnershipParams {
    pub fn new(beta: f64, gamma_decay: f64, gamma_entrench: f64) -> Result<Self> {
        Ok(Self {
            beta: check_positive("beta", beta)?,
            gamma_decay: check_positive("gamma_decay", gamma_decay)?,
            gamma_entrench: check_positive("gamma_entrench", gamma_entrench)?,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma_decay(&self) -> f64 {
        self.gamma_decay
    }
    pub fn gamma_entrench(&self) -> f64 {
        self.gamma_entrench
    }
}

/// Whether the agent holds consent, as a step function of time. Each switch
/// `(t, holding)` applies from `t` onward; before the first switch the agent
/// is holding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, bool)>", into = "Vec<(f64, bool)>")]
pub struct HoldingSchedule {
    switches: Vec<(f64, bool)>,
}

impl TryFrom<Vec<(f64, bool)>> for HoldingSchedule {
    type Error = Error;

    fn try_from(v: Vec<(f64, bool)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<HoldingSchedule> for Vec<(f64, bool)> {
    fn from(s: HoldingSchedule) -> Self {
        s.switches
    }
}

impl HoldingSchedule {
    pub fn new(switches: Vec<(f64, bool)>) -> Result<Self> {
        for (i, &(t, _)) in switches.iter().enumerate() {
            check_nonneg("switch time", t)?;
            if i > 0 && t <= switches[i - 1].0 {
                return Err(Error::Invalid(format!(
                    "holding switches must be strictly increasing (index {i})"
                )));
            }
        }
        Ok(Self { switches })
    }

    pub fn always(holding: bool) -> Self {
        Self {
            switches: vec![(0.0, holding)],
        }
    }

    pub fn holding_at(&self, t: f64) -> bool {
        self.switches
            .iter()
            .take_while(|&&(start, _)| start <= t)
            .last()
            .map_or(true, |&(_, h)| h)
    }
}

/// Integrate ownership with RK4; returns `steps + 1` values starting at `o0`.
pub fn ownership_integrate(
    o0: f64,
    params: &OwnershipParams,
    schedule: &HoldingSchedule,
    dt: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    check_range("initial ownership", o0, 0.0, 1.0, "[0, 1]")?;
    check_positive("dt", dt)?;
    let rhs = |t: f64, y: &[f64]| {
        let o = y[0];
        vec![if schedule.holding_at(t) {
            params.beta * (1.0 - o)
        } else {
            -params.gamma_decay * o
        }]
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut o = o0;
    out.push(o);
    for step in 0..steps {
        o = rk4_step(&rhs, step as f64 * dt, &[o], dt)[0].clamp(0.0, 1.0);
        out.push(o);
    }
    Ok(out)
}

/// Unnormalized transition hazard after `tenure`: `exp(-gamma (1 - exp(-beta tenure)))`.
pub fn tenure_transition_hazard(tenure: f64, params: &OwnershipParams) -> Result<f64> {
    check_nonneg("tenure", tenure)?;
    let ownership = 1.0 - (-params.beta * tenure).exp();
    Ok((-params.gamma_entrench * ownership).exp())
}
