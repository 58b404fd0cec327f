mod common;

use common::random_stochastic;
use friction_core::coarse::{check_lumpability, coarse_grain, commutation_error, project, Partition};
use friction_core::rom::{rom_derivative, Population, RomSystem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lumpable 4-type system over classes {0, 1} and {2, 3}. Block sums of
/// every row are (0.7, 0.3) for class 0 and (0.2, 0.8) for class 1.
fn block_system() -> RomSystem {
    RomSystem::new(
        vec![1.0, 1.0, 2.0, 2.0],
        vec![0.9, 0.9, 0.5, 0.5],
        vec![
            vec![0.5, 0.2, 0.2, 0.1],
            vec![0.3, 0.4, 0.1, 0.2],
            vec![0.1, 0.1, 0.4, 0.4],
            vec![0.15, 0.05, 0.3, 0.5],
        ],
    )
    .unwrap()
}

fn perturbed() -> RomSystem {
    let mut m = block_system().mutation().clone();
    m[0][1] -= 0.05;
    m[0][2] += 0.05;
    block_system().with_mutation(m).unwrap()
}

fn halves() -> Partition {
    Partition::new(vec![0, 0, 1, 1]).unwrap()
}

fn p0() -> Population {
    Population::new(vec![0.4, 0.1, 0.3, 0.2]).unwrap()
}

/// Sum of `w rho M` over each target class, written out directly.
fn flow_blocks(sys: &RomSystem, part: &Partition) -> Vec<Vec<f64>> {
    (0..sys.type_count())
        .map(|s| {
            let mut acc = vec![0.0; part.class_count()];
            for t in 0..sys.type_count() {
                acc[part.class_of(t)] += sys.weights()[s] * sys.survival()[s] * sys.mutation()[s][t];
            }
            acc
        })
        .collect()
}

#[test]
fn construction_satisfies_flow_sums() {
    let b = flow_blocks(&block_system(), &halves());
    for c in 0..2 {
        assert!((b[0][c] - b[1][c]).abs() < 1e-12);
        assert!((b[2][c] - b[3][c]).abs() < 1e-12);
    }
    let b = flow_blocks(&perturbed(), &halves());
    assert!((b[0][0] - b[1][0]).abs() > 0.04);
    assert!(check_lumpability(&block_system(), &halves(), 1e-12).unwrap().is_lumpable());
    assert!(!check_lumpability(&perturbed(), &halves(), 1e-12).unwrap().is_lumpable());
}

#[test]
fn commutation_lumpable_vs_perturbed() {
    let exact = commutation_error(&block_system(), &halves(), &p0(), 1e-3, 1000).unwrap();
    assert!(exact < 1e-6, "{exact}");
    let off = commutation_error(&perturbed(), &halves(), &p0(), 1e-3, 1000).unwrap();
    assert!(off > 1e-3, "{off}");
}

#[test]
fn commutation_does_not_grow_as_dt_shrinks() {
    let coarse_dt = commutation_error(&block_system(), &halves(), &p0(), 2e-3, 500).unwrap();
    let fine_dt = commutation_error(&block_system(), &halves(), &p0(), 1e-3, 1000).unwrap();
    assert!(fine_dt <= coarse_dt + 1e-15);
}

#[test]
fn coarse_derivative_commutes_with_projection() {
    let c = coarse_grain(&block_system(), &halves(), &p0(), 1e-12).unwrap();
    let fine = rom_derivative(&p0(), &block_system()).unwrap();
    let coarse = rom_derivative(&project(&p0(), &halves()).unwrap(), &c).unwrap();
    assert!((fine[0] + fine[1] - coarse[0]).abs() < 1e-9);
    assert!((fine[2] + fine[3] - coarse[1]).abs() < 1e-9);
}

#[test]
fn report_booleans_follow_deviations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.random_range(2..6);
        let sys = RomSystem::new(
            (0..n).map(|_| rng.random_range(0.5..1.5)).collect(),
            (0..n).map(|_| rng.random_range(0.1..1.0)).collect(),
            random_stochastic(&mut rng, n),
        )
        .unwrap();
        let k = rng.random_range(1..=n);
        let mut assign: Vec<usize> = (0..n).map(|i| i % k).collect();
        assign.rotate_left(rng.random_range(0..n));
        let part = Partition::new(assign).unwrap();
        let tol = 10f64.powi(-rng.random_range(1..4));
        let r = check_lumpability(&sys, &part, tol).unwrap();
        assert_eq!(r.transition_uniform, r.transition_deviation <= tol);
        assert_eq!(r.survival_homogeneous, r.survival_spread <= tol);
        assert_eq!(r.weighted_flow_uniform, r.weighted_flow_deviation <= tol);
    }
}

proptest! {
    #[test]
    fn projection_preserves_mass_and_composes(
        raw in prop::collection::vec(0.0f64..1.0, 6),
        mid in prop::collection::vec(0usize..3, 6),
        top in prop::collection::vec(0usize..2, 3),
    ) {
        let s: f64 = raw.iter().sum();
        prop_assume!(s > 0.0);
        let p = Population::new(raw.iter().map(|x| x / s).collect()).unwrap();
        let (Ok(a), Ok(b)) = (Partition::new(mid), Partition::new(top)) else {
            return Ok(());
        };
        prop_assume!(a.class_count() == b.fine_count());
        let two_step = project(&project(&p, &a).unwrap(), &b).unwrap();
        let direct = project(&p, &a.compose(&b).unwrap()).unwrap();
        for (x, y) in two_step.as_slice().iter().zip(direct.as_slice()) {
            prop_assert!((x - y).abs() < 1e-15);
        }
        let total: f64 = project(&p, &a).unwrap().as_slice().iter().sum();
        prop_assert!((total - p.as_slice().iter().sum::<f64>()).abs() < 1e-15);
    }
}
