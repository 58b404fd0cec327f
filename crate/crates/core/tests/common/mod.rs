#![allow(dead_code)]

use friction_core::rom::{Matrix, RomSystem};
use rand::Rng;

/// Strictly positive row-stochastic matrix, hence ergodic.
pub fn random_stochastic<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    (0..n)
        .map(|_| {
            let row: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = row.iter().sum();
            row.into_iter().map(|x| x / s).collect()
        })
        .collect()
}

pub fn random_system<R: Rng>(rng: &mut R, n: usize) -> RomSystem {
    let w = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
    let rho = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    RomSystem::new(w, rho, random_stochastic(rng, n)).unwrap()
}

/// `dp/dt` written out term by term.
pub fn naive_derivative(p: &[f64], w: &[f64], rho: &[f64], m: &Matrix) -> Vec<f64> {
    let n = p.len();
    let phi_bar: f64 = (0..n).map(|s| p[s] * w[s] * rho[s]).sum();
    (0..n)
        .map(|t| {
            let mut inflow = 0.0;
            for s in 0..n {
                inflow += p[s] * w[s] * rho[s] * m[s][t];
            }
            inflow - p[t] * phi_bar
        })
        .collect()
}
