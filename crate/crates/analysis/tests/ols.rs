mod common;

use friction_analysis::{fit_ols, AnalysisError};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn with_intercept(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let n = cols[0].len();
    DMatrix::from_fn(n, cols.len() + 1, |i, j| if j == 0 { 1.0 } else { cols[j - 1][i] })
}

#[test]
fn recovers_friction_slope() {
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let recs = common::grid(2, |a, s, e| 2.0 * common::f(a, s, e) + noise.sample(&mut rng));
    let f: Vec<f64> = recs.iter().map(|r| r.theoretical_friction).collect();
    let y = DVector::from_iterator(recs.len(), recs.iter().map(|r| r.reward_gap.unwrap()));
    let fit = fit_ols(&y, &with_intercept(&[f])).unwrap();
    assert!((1.9..=2.1).contains(&fit.coefficients[1]), "{}", fit.coefficients[1]);
    assert!(fit.coefficients[0].abs() < 0.01);
    assert!(fit.r_squared > 0.999);
}

#[test]
fn useless_column_keeps_rss_and_costs_bic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let x: Vec<f64> = (0..60).map(|i| i as f64 / 10.0).collect();
    let junk: Vec<f64> = (0..60).map(|_| noise.sample(&mut rng)).collect();
    let y = DVector::from_iterator(60, x.iter().map(|v| 1.0 + 0.5 * v + noise.sample(&mut rng)));
    let small = fit_ols(&y, &with_intercept(&[x.clone()])).unwrap();
    let big = fit_ols(&y, &with_intercept(&[x, junk])).unwrap();
    assert!(big.rss <= small.rss * (1.0 + 1e-12));
    let n = 60f64;
    let bic_delta = big.bic - small.bic;
    assert!((bic_delta - (n * (big.rss / small.rss).ln() + n.ln())).abs() < 1e-9);
    if big.rss / small.rss > (-n.ln() / n).exp() {
        assert!(big.bic > small.bic);
    }
}

#[test]
fn singular_design() {
    let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
    let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
    assert!(matches!(fit_ols(&y, &x), Err(AnalysisError::Singular { .. })));
}

proptest! {
    #[test]
    fn residuals_orthogonal_to_design(
        rows in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -10.0f64..10.0), 8..40),
    ) {
        let n = rows.len();
        let x = with_intercept(&[rows.iter().map(|r| r.0).collect(), rows.iter().map(|r| r.1).collect()]);
        let y = DVector::from_iterator(n, rows.iter().map(|r| r.2));
        let Ok(fit) = fit_ols(&y, &x) else { return Ok(()) };
        let resid = DVector::from_column_slice(&fit.residuals);
        let scale = 1.0 + y.norm() * x.norm();
        for c in x.column_iter() {
            prop_assert!(c.dot(&resid).abs() < 1e-8 * scale);
        }
        prop_assert!((0.0..=1.0 + 1e-12).contains(&fit.r_squared));
        prop_assert!(fit.aic.is_finite() && fit.bic.is_finite());
    }

    #[test]
    fn nested_rss_never_grows(
        rows in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -10.0f64..10.0), 8..40),
    ) {
        let n = rows.len();
        let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let y = DVector::from_iterator(n, rows.iter().map(|r| r.2));
        let (Ok(small), Ok(big)) = (fit_ols(&y, &with_intercept(&[a.clone()])), fit_ols(&y, &with_intercept(&[a, b]))) else {
            return Ok(());
        };
        prop_assert!(big.rss <= small.rss + 1e-9 * (1.0 + small.rss));
    }
}
