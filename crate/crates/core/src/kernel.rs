//! Friction and legitimacy algebra.
//!
//! Friction for a single domain is `sigma * (1 + epsilon) / (1 + alpha)`. It has
//! a pole at `alpha = -1`, which every evaluation reports as
//! [`Error::Divergence`] rather than returning an infinite value.

use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, check_range, Error, Result};

/// Alignment, stake and entropy of one domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTriple")]
pub struct KernelTriple {
    alpha: f64,
    sigma: f64,
    epsilon: f64,
}

#[derive(Deserialize)]
struct RawTriple {
    alpha: f64,
    sigma: f64,
    epsilon: f64,
}

impl TryFrom<RawTriple> for KernelTriple {
    type Error = Error;

    fn try_from(raw: RawTriple) -> Result<Self> {
        KernelTriple::new(raw.alpha, raw.sigma, raw.epsilon)
    }
}

impl KernelTriple {
    pub fn new(alpha: f64, sigma: f64, epsilon: f64) -> Result<Self> {
        Ok(Self {
            alpha: check_range("alpha", alpha, -1.0, 1.0, "[-1, 1]")?,
            sigma: check_nonneg("sigma", sigma)?,
            epsilon: check_range("epsilon", epsilon, 0.0, 1.0, "[0, 1]")?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `1 + alpha`, or a divergence error at the pole.
    fn denom(&self) -> Result<f64> {
        pole_free(self.alpha, None)
    }
}

fn pole_free(alpha: f64, who: Option<&str>) -> Result<f64> {
    if alpha <= -1.0 {
        Err(Error::Divergence {
            stakeholder: who.map(str::to_owned),
        })
    } else {
        Ok(1.0 + alpha)
    }
}

/// Canonical friction `sigma * (1 + epsilon) / (1 + alpha)`.
pub fn friction(k: &KernelTriple) -> Result<f64> {
    Ok(k.sigma * (1.0 + k.epsilon) / k.denom()?)
}

/// Alternative functional forms used for model comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrictionForm {
    Canonical,
    Additive,
    Multiplicative,
    Exponential,
    PowerLaw { p: f64, q: f64 },
}

pub fn friction_form(form: FrictionForm, k: &KernelTriple) -> Result<f64> {
    let (s, a, e) = (k.sigma, k.alpha, k.epsilon);
    Ok(match form {
        FrictionForm::Canonical => friction(k)?,
        FrictionForm::Additive => s + e - a,
        FrictionForm::Multiplicative => s * e * (1.0 - a),
        FrictionForm::Exponential => s * (e - a).exp(),
        FrictionForm::PowerLaw { p, q } => {
            let d = k.denom()?;
            // keep the p = q = 1 case bit-identical to the canonical form
            if p == 1.0 && q == 1.0 {
                s * (1.0 + e) / d
            } else {
                s * (1.0 + e).powf(p) / d.powf(q)
            }
        }
    })
}

/// Partial derivatives of friction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionPartials {
    pub d_sigma: f64,
    pub d_alpha: f64,
    pub d_epsilon: f64,
}

impl FrictionPartials {
    /// Inner product with a direction `(d_sigma, d_alpha, d_epsilon)`.
    pub fn dot(&self, d_sigma: f64, d_alpha: f64, d_epsilon: f64) -> f64 {
        self.d_sigma * d_sigma + self.d_alpha * d_alpha + self.d_epsilon * d_epsilon
    }
}

pub fn friction_partials(k: &KernelTriple) -> Result<FrictionPartials> {
    let d = k.denom()?;
    Ok(FrictionPartials {
        d_sigma: (1.0 + k.epsilon) / d,
        d_alpha: -k.sigma * (1.0 + k.epsilon) / (d * d),
        d_epsilon: k.sigma / d,
    })
}

/// Measurement noise on each component of a kernel triple.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TripleNoise {
    pub sigma: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

/// First-order shift `F_hat - F` caused by additive measurement noise.
pub fn friction_error_propagation(k: &KernelTriple, noise: &TripleNoise) -> Result<f64> {
    Ok(friction_partials(k)?.dot(noise.sigma, noise.alpha, noise.epsilon))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStakeholder")]
pub struct Stakeholder {
    id: String,
    stake: f64,
    alignment: f64,
    entropy: f64,
    voice: f64,
    consents: bool,
}

#[derive(Deserialize)]
struct RawStakeholder {
    id: String,
    stake: f64,
    alignment: f64,
    entropy: f64,
    voice: f64,
    consents: bool,
}

impl TryFrom<RawStakeholder> for Stakeholder {
    type Error = Error;

    fn try_from(r: RawStakeholder) -> Result<Self> {
        Stakeholder::new(r.id, r.stake, r.alignment, r.entropy, r.voice, r.consents)
    }
}

impl Stakeholder {
    pub fn new(
        id: impl Into<String>,
        stake: f64,
        alignment: f64,
        entropy: f64,
        voice: f64,
        consents: bool,
    ) -> Result<Self> {
        Ok(Self {
            id: id.into(),
            stake: check_nonneg("stake", stake)?,
            alignment: check_range("alignment", alignment, -1.0, 1.0, "[-1, 1]")?,
            entropy: check_range("entropy", entropy, 0.0, 1.0, "[0, 1]")?,
            voice: check_range("voice", voice, 0.0, 1.0, "[0, 1]")?,
            consents,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    pub fn stake(&self) -> f64 {
        self.stake
    }
    pub fn alignment(&self) -> f64 {
        self.alignment
    }
    pub fn entropy(&self) -> f64 {
        self.entropy
    }
    pub fn voice(&self) -> f64 {
        self.voice
    }
    pub fn consents(&self) -> bool {
        self.consents
    }

    /// Per-stakeholder friction term `s (1 + eps) / (1 + alpha)`.
    pub fn friction_term(&self) -> Result<f64> {
        let d = pole_free(self.alignment, Some(&self.id))?;
        Ok(self.stake * (1.0 + self.entropy) / d)
    }
}

/// The stakeholders affected by decisions in one domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawDomain")]
pub struct DelegationDomain {
    stakeholders: Vec<Stakeholder>,
    #[serde(skip_serializing)]
    total_stake: f64,
}

#[derive(Deserialize)]
struct RawDomain {
    stakeholders: Vec<Stakeholder>,
}

impl From<RawDomain> for DelegationDomain {
    fn from(raw: RawDomain) -> Self {
        Self::new(raw.stakeholders)
    }
}

impl DelegationDomain {
    pub fn new(stakeholders: Vec<Stakeholder>) -> Self {
        let total_stake = stakeholders.iter().map(|s| s.stake).sum();
        Self {
            stakeholders,
            total_stake,
        }
    }

    pub fn stakeholders(&self) -> &[Stakeholder] {
        &self.stakeholders
    }

    pub fn total_stake(&self) -> f64 {
        self.total_stake
    }

    /// Members with strictly positive stake.
    pub fn affected(&self) -> impl Iterator<Item = &Stakeholder> {
        self.stakeholders.iter().filter(|s| s.stake > 0.0)
    }

    fn require_stake(&self, what: &'static str) -> Result<f64> {
        if self.total_stake > 0.0 {
            Ok(self.total_stake)
        } else {
            Err(Error::Undefined(what))
        }
    }

    /// Mean entropy across stakeholders, unweighted. Zero for an empty domain.
    pub fn mean_entropy(&self) -> f64 {
        if self.stakeholders.is_empty() {
            return 0.0;
        }
        self.stakeholders.iter().map(|s| s.entropy).sum::<f64>() / self.stakeholders.len() as f64
    }
}

/// Total friction `sum_i s_i (1 + eps_i) / (1 + alpha_i)`.
pub fn friction_aggregate(d: &DelegationDomain) -> Result<f64> {
    d.stakeholders.iter().map(Stakeholder::friction_term).sum()
}

/// Stake-weighted mean of effective voice.
pub fn legitimacy(d: &DelegationDomain) -> Result<f64> {
    let total = d.require_stake("legitimacy")?;
    let weighted: f64 = d.stakeholders.iter().map(|s| s.stake * s.voice).sum();
    Ok((weighted / total).clamp(0.0, 1.0))
}

/// Consent predicate: consenting stake reaches fraction `theta` of affected stake.
pub fn is_legitimate(d: &DelegationDomain, theta: f64) -> Result<bool> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            range: "(0, 1]",
        });
    }
    d.require_stake("consent threshold")?;
    let (consenting, affected) = d.affected().fold((0.0, 0.0), |(c, a), s| {
        (c + if s.consents { s.stake } else { 0.0 }, a + s.stake)
    });
    Ok(consenting >= theta * affected)
}

/// Stake-weighted mean alignment.
pub fn aggregate_alignment(d: &DelegationDomain) -> Result<f64> {
    let total = d.require_stake("aggregate alignment")?;
    let weighted: f64 = d.stakeholders.iter().map(|s| s.stake * s.alignment).sum();
    Ok((weighted / total).clamp(-1.0, 1.0))
}

/// Piecewise-constant suppression intensity. Each breakpoint `(t, kappa)`
/// sets the intensity from `t` onward; before the first breakpoint the
/// intensity is zero and after the last it stays at the last value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct SuppressionSchedule {
    breakpoints: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for SuppressionSchedule {
    type Error = Error;

    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SuppressionSchedule> for Vec<(f64, f64)> {
    fn from(s: SuppressionSchedule) -> Self {
        s.breakpoints
    }
}

impl SuppressionSchedule {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(t, kappa)) in breakpoints.iter().enumerate() {
            check_nonneg("breakpoint time", t)?;
            check_nonneg("kappa", kappa)?;
            if i > 0 && t <= breakpoints[i - 1].0 {
                return Err(Error::Invalid(format!(
                    "suppression breakpoints must be strictly increasing (index {i})"
                )));
            }
        }
        Ok(Self { breakpoints })
    }

    /// Constant intensity from time zero.
    pub fn constant(kappa: f64) -> Result<Self> {
        Self::new(vec![(0.0, kappa)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// Exact integral of kappa over `[0, t]`.
    pub fn integral(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for (i, &(start, kappa)) in self.breakpoints.iter().enumerate() {
            if start >= t {
                break;
            }
            let end = self
                .breakpoints
                .get(i + 1)
                .map_or(t, |&(next, _)| next.min(t));
            total += kappa * (end - start);
        }
        total
    }
}

/// Friction that would surface if suppression were lifted at time `t`.
pub fn latent_friction(friction: f64, schedule: &SuppressionSchedule, t: f64) -> Result<f64> {
    check_nonneg("friction", friction)?;
    check_nonneg("t", t)?;
    Ok(friction * schedule.integral(t).exp())
}

/// Share of authentic preference variance hidden in expressed preferences,
/// clamped to `[0, 1]`.
pub fn falsification_index(expressed_variance: f64, authentic_variance: f64) -> Result<f64> {
    check_nonneg("expressed variance", expressed_variance)?;
    if !(authentic_variance.is_finite() && authentic_variance > 0.0) {
        return Err(Error::Undefined("falsification index"));
    }
    Ok((1.0 - expressed_variance / authentic_variance).clamp(0.0, 1.0))
}

/// Split total friction into `(observed, latent)` parts.
pub fn falsification_split(total: f64, psi: f64) -> Result<(f64, f64)> {
    check_nonneg("total friction", total)?;
    check_range("psi", psi, 0.0, 1.0, "[0, 1]")?;
    if total == 0.0 || !total.is_finite() {
        return Ok((total - psi * total, psi * total));
    }
    // snap latent to the grid of total's last bit so both parts and their sum are exact
    let ulp = f64::from_bits(total.to_bits() + 1) - total;
    let latent = (psi * total / ulp).round() * ulp;
    Ok((total - latent, latent))
}

/// Stakes, alignments and entropies for a set of agents sharing resources.
///
/// * `stakes[j][r]`: stake of agent `j` in resource `r`
/// * `alignments[c][j][r]`: alignment of controller `c` with agent `j` on resource `r`
/// * `entropies[c][j]`: entropy of the channel from agent `j` to controller `c`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProblem {
    pub stakes: Vec<Vec<f64>>,
    pub alignments: Vec<Vec<Vec<f64>>>,
    pub entropies: Vec<Vec<f64>>,
}

/// Largest agent or resource count accepted by [`friction_aware_allocation`].
pub const MAX_ALLOCATION_SIZE: usize = 6;

impl AllocationProblem {
    pub fn agents(&self) -> usize {
        self.stakes.len()
    }

    pub fn resources(&self) -> usize {
        self.stakes.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.agents();
        let m = self.resources();
        if n == 0 {
            return Err(Error::Degenerate("no agents".into()));
        }
        for row in &self.stakes {
            expect_len("stakes row", m, row.len())?;
            for &s in row {
                check_nonneg("stake", s)?;
            }
        }
        expect_len("alignment controllers", n, self.alignments.len())?;
        for per_ctrl in &self.alignments {
            expect_len("alignment agents", n, per_ctrl.len())?;
            for row in per_ctrl {
                expect_len("alignment resources", m, row.len())?;
                for &a in row {
                    check_range("alignment", a, -1.0, 1.0, "[-1, 1]")?;
                }
            }
        }
        expect_len("entropy controllers", n, self.entropies.len())?;
        for row in &self.entropies {
            expect_len("entropy agents", n, row.len())?;
            for &e in row {
                check_range("entropy", e, 0.0, 1.0, "[0, 1]")?;
            }
        }
        Ok(())
    }

    /// Friction summed over resources and over every non-controlling agent.
    pub fn system_friction(&self, assignment: &[usize]) -> Result<f64> {
        self.validate()?;
        self.friction_unchecked(assignment)
    }

    fn friction_unchecked(&self, assignment: &[usize]) -> Result<f64> {
        let n = self.agents();
        expect_len("assignment", self.resources(), assignment.len())?;
        let mut total = 0.0;
        for (r, &c) in assignment.iter().enumerate() {
            if c >= n {
                return Err(Error::Invalid(format!(
                    "resource {r} assigned to unknown agent {c}"
                )));
            }
            for j in (0..n).filter(|&j| j != c) {
                let d = pole_free(self.alignments[c][j][r], Some(&j.to_string()))?;
                total += self.stakes[j][r] * (1.0 + self.entropies[c][j]) / d;
            }
        }
        Ok(total)
    }
}

fn expect_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}

/// Minimum-friction assignment of resources to controllers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub assignment: Vec<usize>,
    pub objective: f64,
}

/// Exhaustive search over all `n^m` assignments. Ties go to the
/// lexicographically smallest assignment vector.
pub fn friction_aware_allocation(problem: &AllocationProblem) -> Result<Allocation> {
    problem.validate()?;
    let n = problem.agents();
    let m = problem.resources();
    if n > MAX_ALLOCATION_SIZE || m > MAX_ALLOCATION_SIZE {
        return Err(Error::TooLarge(format!(
            "{n} agents x {m} resources exceeds the {MAX_ALLOCATION_SIZE} x {MAX_ALLOCATION_SIZE} exhaustive-search limit"
        )));
    }
    let mut assignment = vec![0usize; m];
    let mut best = Allocation {
        objective: problem.friction_unchecked(&assignment)?,
        assignment: assignment.clone(),
    };
    // odometer over assignments in lexicographic order; strict < keeps the first minimum
    while advance(&mut assignment, n) {
        let f = problem.friction_unchecked(&assignment)?;
        if f < best.objective {
            best = Allocation {
                objective: f,
                assignment: assignment.clone(),
            };
        }
    }
    Ok(best)
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
