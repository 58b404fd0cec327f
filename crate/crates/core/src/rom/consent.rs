use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, check_positive, check_range, Result};
use crate::kernel::{friction_aggregate, legitimacy, DelegationDomain};

/// Survival from legitimacy and friction: `L / (1 + F)`.
pub fn consent_survival(legitimacy: f64, friction: f64) -> Result<f64> {
    let l = check_range("legitimacy", legitimacy, 0.0, 1.0, "[0, 1]")?;
    let f = check_nonneg("friction", friction)?;
    Ok(l / (1.0 + f))
}

/// Base survival suppressed exponentially by friction: `rho_base * exp(-lambda F)`.
pub fn consent_survival_modulated(rho_base: f64, friction: f64, lambda: f64) -> Result<f64> {
    let r = check_range("base survival", rho_base, 0.0, 1.0, "[0, 1]")?;
    let f = check_nonneg("friction", friction)?;
    let l = check_positive("lambda", lambda)?;
    Ok(r * (-l * f).exp())
}

/// Stake held by consenting stakeholders.
pub fn consent_weight(d: &DelegationDomain) -> f64 {
    d.stakeholders()
        .iter()
        .filter(|s| s.consents())
        .map(|s| s.stake())
        .sum()
}

/// Which stake enters a consent type's evolutionary weight.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Stake of consenting stakeholders only.
    #[default]
    Supporters,
    /// Total stake of the domain.
    Total,
}

/// A type instantiated from a delegation configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsentType {
    pub domain: DelegationDomain,
    #[serde(default)]
    pub mean_ownership: f64,
}

impl ConsentType {
    pub fn new(domain: DelegationDomain, mean_ownership: f64) -> Result<Self> {
        check_range("mean ownership", mean_ownership, 0.0, 1.0, "[0, 1]")?;
        Ok(Self {
            domain,
            mean_ownership,
        })
    }

    pub fn legitimacy(&self) -> Result<f64> {
        legitimacy(&self.domain)
    }

    pub fn friction(&self) -> Result<f64> {
        friction_aggregate(&self.domain)
    }

    pub fn survival(&self) -> Result<f64> {
        consent_survival(self.legitimacy()?, self.friction()?)
    }

    pub fn weight(&self, mode: WeightMode) -> f64 {
        match mode {
            WeightMode::Supporters => consent_weight(&self.domain),
            WeightMode::Total => self.domain.total_stake(),
        }
    }

    pub fn mean_entropy(&self) -> f64 {
        self.domain.mean_entropy()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Stakeholder;
    use approx::assert_relative_eq;

    #[test]
    fn survival_examples() {
        assert_eq!(consent_survival(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(consent_survival(0.0, 7.0).unwrap(), 0.0);
        assert_eq!(consent_survival(0.5, 1.0).unwrap(), 0.25);
        assert!(consent_survival(1.5, 0.0).is_err());
        assert!(consent_survival(0.5, -1.0).is_err());
    }

    #[test]
    fn modulated_survival() {
        assert_eq!(consent_survival_modulated(0.7, 0.0, 2.0).unwrap(), 0.7);
        assert_relative_eq!(
            consent_survival_modulated(1.0, 1.0, 1.0).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-15
        );
        let h = 1e-6;
        for f in [0.0, 0.5, 2.0, 10.0] {
            let lo = consent_survival_modulated(0.9, f, 0.7).unwrap();
            let hi = consent_survival_modulated(0.9, f + h, 0.7).unwrap();
            assert!(hi < lo);
        }
        assert!(consent_survival_modulated(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn weight() {
        let d = |c1, c2| {
            DelegationDomain::new(vec![
                Stakeholder::new("a", 3.0, 0.0, 0.0, 1.0, c1).unwrap(),
                Stakeholder::new("b", 1.0, 0.0, 0.0, 1.0, c2).unwrap(),
            ])
        };
        assert_eq!(consent_weight(&d(true, true)), 4.0);
        assert_eq!(consent_weight(&d(false, false)), 0.0);
        assert_eq!(consent_weight(&d(true, false)), 3.0);
        let t = ConsentType::new(d(true, false), 0.0).unwrap();
        assert_eq!(t.weight(WeightMode::Total), 4.0);
        assert_eq!(t.weight(WeightMode::Supporters), 3.0);
    }
}
