mod common;

use friction_analysis::{compare_models, design_matrix, Model, Proxy};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const HORIZON: usize = 10_000;

#[test]
fn friction_feature_matches_kernel() {
    let recs = common::grid(1, |_, _, _| 0.0);
    let x = design_matrix(&recs, Model::M1).unwrap();
    for (i, r) in recs.iter().enumerate() {
        assert_eq!(x[(i, 1)], common::f(r.alpha, r.sigma, r.epsilon));
    }
    let one = design_matrix(&[common::record(0.4, 0.6, 0.5, 0.0)], Model::M4).unwrap();
    assert_eq!(one.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.4, 0.6, 0.5]);
    let m3 = design_matrix(&[common::record(0.0, 1.0, 1.0, 0.0)], Model::M3).unwrap();
    assert_eq!(m3[(0, 1)], 1.0);
}

#[test]
fn pole_rows_rejected() {
    let mut r = common::record(0.0, 0.5, 0.5, 0.0);
    r.alpha = -1.0;
    assert!(design_matrix(&[r], Model::M2).is_err());
}

#[test]
fn friction_generated_data_ranks_m1_first() {
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let recs = common::grid(2, |a, s, e| 0.3 + 1.5 * common::f(a, s, e) + noise.sample(&mut rng));
    let scores = compare_models(&recs, Proxy::RewardGap, HORIZON).unwrap();
    assert_eq!(scores[0].model, Model::M1);
    assert_eq!(scores[0].delta_aic, 0.0);
    assert!(scores.windows(2).all(|w| w[0].aic <= w[1].aic));
    assert_eq!(scores.iter().map(|s| s.rank).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
}

#[test]
fn independent_effects_beat_friction_on_aic() {
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let recs = common::grid(2, |a, s, e| 1.0 - 0.7 * a + 0.4 * s + 0.9 * e + noise.sample(&mut rng));
    let scores = compare_models(&recs, Proxy::RewardGap, HORIZON).unwrap();
    let aic = |m| scores.iter().find(|s| s.model == m).unwrap().aic;
    assert!(aic(Model::M4) < aic(Model::M1));
    assert_eq!(scores[0].model, Model::M4);
}

#[test]
fn too_few_records() {
    let recs: Vec<_> = (0..9).map(|i| common::record(0.0, 0.5, i as f64 / 10.0, i as f64)).collect();
    assert!(compare_models(&recs, Proxy::RewardGap, HORIZON).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ranking_ignores_record_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.2).unwrap();
        let mut recs = common::grid(1, |a, s, e| common::f(a, s, e) + e - a + noise.sample(&mut rng));
        let before = compare_models(&recs, Proxy::RewardGap, HORIZON).unwrap();
        recs.shuffle(&mut rng);
        let after = compare_models(&recs, Proxy::RewardGap, HORIZON).unwrap();
        for (b, a) in before.iter().zip(&after) {
            prop_assert_eq!(b.model, a.model);
            prop_assert!((b.aic - a.aic).abs() < 1e-8 * (1.0 + b.aic.abs()));
        }
    }
}
