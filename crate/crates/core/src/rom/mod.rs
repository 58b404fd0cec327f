//! Replicator-mutator dynamics over a finite type space.
//!
//! The population evolves as
//! `dp(t)/dt = sum_s p(s) w(s) rho(s) M(s -> t) - p(t) * phi_bar`
//! where `phi_bar = sum_s p(s) w(s) rho(s)` is mean fitness.

mod consent;
mod mutation;
mod ownership;
mod stationary;

pub use consent::{consent_survival, consent_survival_modulated, consent_weight, ConsentType, WeightMode};
pub use mutation::{entropy_modulated_mutation, ownership_modulated_mutation};
pub use ownership::{ownership_integrate, tenure_transition_hazard, HoldingSchedule, OwnershipParams};
pub use stationary::{check_ergodic, stationary_distribution, stationary_residual};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::rk4_step;

pub(crate) const STOCHASTIC_TOL: f64 = 1e-9;

/// Row-stochastic matrix stored as rows.
pub type Matrix = Vec<Vec<f64>>;

pub(crate) fn validate_stochastic(m: &Matrix, n: usize) -> Result<()> {
    if m.len() != n {
        return Err(Error::Dimension {
            what: "mutation rows",
            expected: n,
            got: m.len(),
        });
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Dimension {
                what: "mutation columns",
                expected: n,
                got: row.len(),
            });
        }
        if row.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::Invalid(format!("mutation row {i} has a negative entry")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::Invalid(format!("mutation row {i} sums to {s}, expected 1")));
        }
    }
    Ok(())
}

pub(crate) fn normalize_rows(m: &mut Matrix) {
    for row in m.iter_mut() {
        let s: f64 = row.iter().sum();
        for x in row.iter_mut() {
            *x /= s;
        }
    }
}

/// Weight, survival and mutation kernel of every type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RomDocument", into = "RomDocument")]
pub struct RomSystem {
    weights: Vec<f64>,
    survival: Vec<f64>,
    mutation: Matrix,
}

/// On-disk form of a [`RomSystem`]. Survival and weights may be derived from
/// consent types instead of being listed.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RomDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survival: Option<Vec<f64>>,
    pub mutation: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consent_types: Option<Vec<ConsentType>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_mode: Option<WeightMode>,
}

impl TryFrom<RomDocument> for RomSystem {
    type Error = Error;

    fn try_from(doc: RomDocument) -> Result<Self> {
        let n = doc.mutation.len();
        let derived = match &doc.consent_types {
            Some(types) => {
                if types.len() != n {
                    return Err(Error::Dimension {
                        what: "consent types",
                        expected: n,
                        got: types.len(),
                    });
                }
                let mode = doc.weight_mode.unwrap_or_default();
                let mut w = Vec::with_capacity(n);
                let mut rho = Vec::with_capacity(n);
                for t in types {
                    w.push(t.weight(mode));
                    rho.push(t.survival()?);
                }
                Some((w, rho))
            }
            None => None,
        };
        let weights = match (doc.weights, &derived) {
            (Some(w), _) => w,
            (None, Some((w, _))) => w.clone(),
            (None, None) => return Err(Error::Invalid("missing weights".into())),
        };
        let survival = match (doc.survival, derived) {
            (Some(s), _) => s,
            (None, Some((_, rho))) => rho,
            (None, None) => return Err(Error::Invalid("missing survival".into())),
        };
        RomSystem::new(weights, survival, doc.mutation)
    }
}

impl From<RomSystem> for RomDocument {
    fn from(sys: RomSystem) -> Self {
        RomDocument {
            weights: Some(sys.weights),
            survival: Some(sys.survival),
            mutation: sys.mutation,
            consent_types: None,
            weight_mode: None,
        }
    }
}

impl RomSystem {
    /// Rows of `mutation` must sum to 1 within 1e-9; they are renormalized exactly.
    pub fn new(weights: Vec<f64>, survival: Vec<f64>, mut mutation: Matrix) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::Degenerate("a system needs at least one type".into()));
        }
        if survival.len() != n {
            return Err(Error::Dimension {
                what: "survival",
                expected: n,
                got: survival.len(),
            });
        }
        for &w in &weights {
            crate::error::check_nonneg("weight", w)?;
        }
        for &r in &survival {
            crate::error::check_range("survival", r, 0.0, 1.0, "[0, 1]")?;
        }
        validate_stochastic(&mutation, n)?;
        normalize_rows(&mut mutation);
        Ok(Self {
            weights,
            survival,
            mutation,
        })
    }

    /// Derive weights and survival from consent types.
    pub fn from_consent_types(types: &[ConsentType], mode: WeightMode, mutation: Matrix) -> Result<Self> {
        RomDocument {
            mutation,
            consent_types: Some(types.to_vec()),
            weight_mode: Some(mode),
            ..Default::default()
        }
        .try_into()
    }

    pub fn type_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    pub fn mutation(&self) -> &Matrix {
        &self.mutation
    }

    /// Effective fitness `w * rho` of each type.
    pub fn fitness(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.survival)
            .map(|(w, r)| w * r)
            .collect()
    }

    /// Weighted transition matrix `Q(s, t) = w(s) rho(s) M(s -> t)`.
    pub fn weighted_flow(&self) -> Matrix {
        self.fitness()
            .iter()
            .zip(&self.mutation)
            .map(|(f, row)| row.iter().map(|m| f * m).collect())
            .collect()
    }

    pub fn with_mutation(&self, mutation: Matrix) -> Result<Self> {
        Self::new(self.weights.clone(), self.survival.clone(), mutation)
    }

    pub fn with_survival(&self, survival: Vec<f64>) -> Result<Self> {
        Self::new(self.weights.clone(), survival, self.mutation.clone())
    }

    fn check_dim(&self, p: &Population) -> Result<()> {
        if p.len() != self.type_count() {
            return Err(Error::Dimension {
                what: "population",
                expected: self.type_count(),
                got: p.len(),
            });
        }
        Ok(())
    }

    /// Derivative for a raw vector; used inside RK4 stages where the
    /// intermediate point may leave the simplex slightly.
    fn derivative_raw(&self, p: &[f64]) -> Vec<f64> {
        let fitness = self.fitness();
        let n = p.len();
        let mut out = vec![0.0; n];
        let mut phi = 0.0;
        for (s, row) in self.mutation.iter().enumerate() {
            let mass = p[s] * fitness[s];
            phi += mass;
            for (t, m) in row.iter().enumerate() {
                out[t] += mass * m;
            }
        }
        for (o, ps) in out.iter_mut().zip(p) {
            *o -= ps * phi;
        }
        out
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Population(Vec<f64>);

impl TryFrom<Vec<f64>> for Population {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Population> for Vec<f64> {
    fn from(p: Population) -> Self {
        p.0
    }
}

impl Population {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Degenerate("empty population".into()));
        }
        if p.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::Invalid("population entries must be non-negative".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::Invalid(format!("population sums to {s}, expected 1")));
        }
        Ok(Self(p))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Degenerate("empty population".into()));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// Clip negatives to zero and rescale to unit mass.
    pub fn project(raw: Vec<f64>) -> Result<Self> {
        let mut p: Vec<f64> = raw.into_iter().map(|x| x.max(0.0)).collect();
        let s: f64 = p.iter().sum();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Degenerate("population has no mass to renormalize".into()));
        }
        for x in &mut p {
            *x /= s;
        }
        Ok(Self(p))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total variation distance `0.5 * sum |p - q|`.
    pub fn total_variation(&self, other: &Population) -> f64 {
        0.5 * self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// Mean effective fitness `sum p w rho`.
pub fn mean_fitness(p: &Population, sys: &RomSystem) -> Result<f64> {
    sys.check_dim(p)?;
    Ok(p.0
        .iter()
        .zip(sys.fitness())
        .map(|(pi, f)| pi * f)
        .sum())
}

pub fn rom_derivative(p: &Population, sys: &RomSystem) -> Result<Vec<f64>> {
    sys.check_dim(p)?;
    Ok(sys.derivative_raw(&p.0))
}

/// Fixed-step RK4 with clip-and-renormalize after every step. The returned
/// trajectory holds `steps + 1` points starting at `p0`.
pub fn rom_integrate(p0: &Population, sys: &RomSystem, dt: f64, steps: usize) -> Result<Vec<Population>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(p0.clone());
    rom_integrate_with(p0, sys, dt, steps, |_, p| out.push(p.clone()))?;
    Ok(out)
}

/// Like [`rom_integrate`] but hands each new point to `visit` and returns only
/// the endpoint.
pub fn rom_integrate_with<F>(p0: &Population, sys: &RomSystem, dt: f64, steps: usize, mut visit: F) -> Result<Population>
where
    F: FnMut(usize, &Population),
{
    sys.check_dim(p0)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::OutOfRange {
            name: "dt",
            value: dt,
            range: "(0, inf)",
        });
    }
    let rhs = |_t: f64, y: &[f64]| sys.derivative_raw(y);
    let mut p = p0.clone();
    for step in 1..=steps {
        let next = rk4_step(&rhs, (step - 1) as f64 * dt, &p.0, dt);
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { step });
        }
        p = Population::project(next).map_err(|_| Error::NonFinite { step })?;
        visit(step, &p);
    }
    Ok(p)
}
