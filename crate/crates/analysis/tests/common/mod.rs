#![allow(dead_code)]

use friction_core::{friction, KernelTriple};
use friction_marl::MetricsRecord;

pub const ALPHAS: [f64; 5] = [-0.8, -0.4, 0.0, 0.4, 0.8];
pub const SIGMAS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
pub const EPSILONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

pub fn record(alpha: f64, sigma: f64, epsilon: f64, gap: f64) -> MetricsRecord {
    MetricsRecord {
        alpha_index: 0,
        sigma_index: 0,
        epsilon_index: 0,
        replication: 0,
        alpha,
        sigma,
        epsilon,
        seed: 0,
        reward_gap: Some(gap),
        convergence_time: None,
        policy_variance: None,
        pareto_inefficiency: None,
        measured_alignment: None,
        theoretical_friction: f(alpha, sigma, epsilon),
        error: None,
    }
}

pub fn f(alpha: f64, sigma: f64, epsilon: f64) -> f64 {
    friction(&KernelTriple::new(alpha, sigma, epsilon).unwrap()).unwrap()
}

/// Full factorial grid, `reps` records per cell, proxy from `gap`.
pub fn grid<G: FnMut(f64, f64, f64) -> f64>(reps: usize, mut gap: G) -> Vec<MetricsRecord> {
    let mut out = Vec::new();
    for &a in &ALPHAS {
        for &s in &SIGMAS {
            for &e in &EPSILONS {
                for _ in 0..reps {
                    out.push(record(a, s, e, gap(a, s, e)));
                }
            }
        }
    }
    out
}
