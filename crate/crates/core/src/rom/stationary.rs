use std::collections::VecDeque;

use super::{Matrix, Population, RomSystem};
use crate::error::{Error, Result};

fn support_graph(m: &Matrix) -> Vec<Vec<usize>> {
    m.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &x)| x > 0.0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

fn bfs_levels(adj: &[Vec<usize>], root: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let next = level[u].map(|l| l + 1);
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = next;
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Irreducibility (strong connectivity of the support of `m`) and
/// aperiodicity (gcd of cycle lengths equal to one).
pub fn check_ergodic(m: &Matrix) -> Result<()> {
    let n = m.len();
    let adj = support_graph(m);
    let forward = bfs_levels(&adj, 0);
    if let Some(t) = forward.iter().position(Option::is_none) {
        return Err(Error::NotErgodic(format!("type {t} is unreachable from type 0")));
    }
    let mut reverse = vec![Vec::new(); n];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            reverse[v].push(u);
        }
    }
    if let Some(t) = bfs_levels(&reverse, 0).iter().position(Option::is_none) {
        return Err(Error::NotErgodic(format!("type 0 is unreachable from type {t}")));
    }
    // period = gcd over edges u -> v of level(u) + 1 - level(v)
    let mut period = 0;
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            let (lu, lv) = (forward[u].unwrap_or(0), forward[v].unwrap_or(0));
            period = gcd(period, (lu + 1).abs_diff(lv));
        }
    }
    if period != 1 {
        return Err(Error::NotErgodic(format!("chain has period {period}")));
    }
    Ok(())
}

/// `max_t |sum_s p(s) Q(s, t) - p(t) phi_bar|`.
pub fn stationary_residual(p: &Population, sys: &RomSystem) -> Result<f64> {
    let d = super::rom_derivative(p, sys)?;
    Ok(d.iter().fold(0.0, |acc, x| acc.max(x.abs())))
}

/// Power iteration on `Q(s, t) = w(s) rho(s) M(s -> t)` until the fixed-point
/// residual drops below `tol`.
pub fn stationary_distribution(sys: &RomSystem, tol: f64, max_iters: usize) -> Result<Population> {
    if let Some(t) = sys.fitness().iter().position(|&f| !(f > 0.0)) {
        return Err(Error::NotErgodic(format!("type {t} has zero effective fitness")));
    }
    check_ergodic(sys.mutation())?;
    let q = sys.weighted_flow();
    let n = sys.type_count();
    let mut p = Population::uniform(n)?;
    let mut residual = stationary_residual(&p, sys)?;
    for _ in 0..max_iters {
        if residual < tol {
            return Ok(p);
        }
        let mut next = vec![0.0; n];
        for (ps, row) in p.as_slice().iter().zip(&q) {
            for (acc, qst) in next.iter_mut().zip(row) {
                *acc += ps * qst;
            }
        }
        p = Population::project(next)?;
        residual = stationary_residual(&p, sys)?;
    }
    if residual < tol {
        Ok(p)
    } else {
        Err(Error::NoConvergence {
            iterations: max_iters,
            residual,
        })
    }
}
