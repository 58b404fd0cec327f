//! Coarse-graining of replicator-mutator systems over a partition of types.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rom::{rom_integrate_with, Matrix, Population, RomSystem};

/// Surjective map from fine types onto coarse classes `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    assignment: Vec<usize>,
    classes: usize,
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.assignment
    }
}

impl Partition {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::Degenerate("empty partition".into()));
        }
        let classes = assignment.iter().max().map_or(0, |m| m + 1);
        if classes > assignment.len() {
            return Err(Error::Invalid(format!(
                "class index {} exceeds the number of fine types",
                classes - 1
            )));
        }
        let mut seen = vec![false; classes];
        for &c in &assignment {
            seen[c] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(Error::Invalid(format!("coarse class {empty} has no members")));
        }
        Ok(Self { assignment, classes })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    pub fn fine_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn class_count(&self) -> usize {
        self.classes
    }

    pub fn class_of(&self, fine: usize) -> usize {
        self.assignment[fine]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn members(&self, class: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&t| self.assignment[t] == class)
            .collect()
    }

    /// Apply `self` then `coarser`.
    pub fn compose(&self, coarser: &Partition) -> Result<Partition> {
        if coarser.fine_count() != self.classes {
            return Err(Error::Dimension {
                what: "partition chain",
                expected: self.classes,
                got: coarser.fine_count(),
            });
        }
        Partition::new(self.assignment.iter().map(|&c| coarser.class_of(c)).collect())
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.fine_count() != n {
            return Err(Error::Dimension {
                what: "partition",
                expected: n,
                got: self.fine_count(),
            });
        }
        Ok(())
    }
}

/// Result of the lumpability tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LumpabilityReport {
    pub tolerance: f64,
    /// Condition (i): raw kernel block sums agree within each class.
    pub transition_uniform: bool,
    pub transition_deviation: f64,
    /// Condition (ii): survival is constant within each class.
    pub survival_homogeneous: bool,
    pub survival_spread: f64,
    /// Block sums of `w * rho * M` agree within each class.
    pub weighted_flow_uniform: bool,
    pub weighted_flow_deviation: f64,
    /// True when the coarse kernel is a class average rather than the exact
    /// block sum of any representative.
    pub approximate_kernel: bool,
}

impl LumpabilityReport {
    /// Conditions (i) and (ii) both hold.
    pub fn is_lumpable(&self) -> bool {
        self.transition_uniform && self.survival_homogeneous
    }
}

/// `block[s][class]` = sum over targets in `class` of `m[s][t]`.
fn block_sums(m: &Matrix, part: &Partition) -> Vec<Vec<f64>> {
    m.iter()
        .map(|row| {
            let mut acc = vec![0.0; part.class_count()];
            for (t, x) in row.iter().enumerate() {
                acc[part.class_of(t)] += x;
            }
            acc
        })
        .collect()
}

/// Largest within-class spread of per-type rows.
fn worst_spread(per_type: &[Vec<f64>], part: &Partition) -> f64 {
    let mut worst: f64 = 0.0;
    for class in 0..part.class_count() {
        let members = part.members(class);
        for col in 0..per_type[0].len() {
            let vals = members.iter().map(|&s| per_type[s][col]);
            let lo = vals.clone().fold(f64::INFINITY, f64::min);
            let hi = vals.fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(hi - lo);
        }
    }
    worst
}

pub fn check_lumpability(sys: &RomSystem, part: &Partition, tol: f64) -> Result<LumpabilityReport> {
    part.check(sys.type_count())?;
    let transition_deviation = worst_spread(&block_sums(sys.mutation(), part), part);
    let weighted_flow_deviation = worst_spread(&block_sums(&sys.weighted_flow(), part), part);
    let rho: Vec<Vec<f64>> = sys.survival().iter().map(|&r| vec![r]).collect();
    let survival_spread = worst_spread(&rho, part);
    Ok(LumpabilityReport {
        tolerance: tol,
        transition_uniform: transition_deviation <= tol,
        transition_deviation,
        survival_homogeneous: survival_spread <= tol,
        survival_spread,
        weighted_flow_uniform: weighted_flow_deviation <= tol,
        weighted_flow_deviation,
        approximate_kernel: transition_deviation > 0.0,
    })
}

/// Total probability of each class.
pub fn project(p: &Population, part: &Partition) -> Result<Population> {
    part.check(p.len())?;
    let mut out = vec![0.0; part.class_count()];
    for (t, x) in p.as_slice().iter().enumerate() {
        out[part.class_of(t)] += x;
    }
    Population::new(out)
}

/// Coarse system, refusing when the partition is not lumpable at `tol`.
pub fn coarse_grain(sys: &RomSystem, part: &Partition, p: &Population, tol: f64) -> Result<RomSystem> {
    let report = check_lumpability(sys, part, tol)?;
    if !report.is_lumpable() {
        return Err(Error::NotLumpable(Box::new(report)));
    }
    coarse_grain_unchecked(sys, part, p)
}

/// Coarse system without the lumpability gate.
///
/// Weight is the class-conditional mean under `p` (unweighted mean for a
/// class with no mass). Survival and the kernel rows are class averages, which
/// equal any member's value when the partition is lumpable.
pub fn coarse_grain_unchecked(sys: &RomSystem, part: &Partition, p: &Population) -> Result<RomSystem> {
    part.check(sys.type_count())?;
    part.check(p.len())?;
    let blocks = block_sums(sys.mutation(), part);
    let k = part.class_count();
    let mut weights = Vec::with_capacity(k);
    let mut survival = Vec::with_capacity(k);
    let mut mutation = Vec::with_capacity(k);
    for class in 0..k {
        let members = part.members(class);
        let count = members.len() as f64;
        let mass: f64 = members.iter().map(|&t| p.as_slice()[t]).sum();
        let w = if mass > 0.0 {
            members
                .iter()
                .map(|&t| sys.weights()[t] * p.as_slice()[t])
                .sum::<f64>()
                / mass
        } else {
            members.iter().map(|&t| sys.weights()[t]).sum::<f64>() / count
        };
        weights.push(w);
        survival.push(members.iter().map(|&t| sys.survival()[t]).sum::<f64>() / count);
        let mut row = vec![0.0; k];
        for &t in &members {
            for (acc, b) in row.iter_mut().zip(&blocks[t]) {
                *acc += b / count;
            }
        }
        mutation.push(row);
    }
    RomSystem::new(weights, survival.into_iter().map(|r| r.clamp(0.0, 1.0)).collect(), mutation)
}

/// Sup-norm gap at the final step between projecting the fine trajectory and
/// integrating the coarse system built at `p0`.
pub fn commutation_error(sys: &RomSystem, part: &Partition, p0: &Population, dt: f64, steps: usize) -> Result<f64> {
    let coarse = coarse_grain_unchecked(sys, part, p0)?;
    let fine_end = rom_integrate_with(p0, sys, dt, steps, |_, _| {})?;
    let coarse_end = rom_integrate_with(&project(p0, part)?, &coarse, dt, steps, |_, _| {})?;
    let projected = project(&fine_end, part)?;
    Ok(projected
        .as_slice()
        .iter()
        .zip(coarse_end.as_slice())
        .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
}
