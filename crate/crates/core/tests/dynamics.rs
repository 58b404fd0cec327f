use friction_core::dynamics::{
    friction_rate, legitimacy_rate, lyapunov_check, ParameterPath, PiecewiseLinear, TripleRates,
};
use friction_core::kernel::{friction_partials, DelegationDomain, KernelTriple, Stakeholder};
use proptest::prelude::*;

/// Increasing knot times starting at 0 with values drawn by `value`.
fn path(values: Vec<f64>, gaps: Vec<f64>) -> PiecewiseLinear {
    let mut t = 0.0;
    let knots = values
        .into_iter()
        .zip(std::iter::once(0.0).chain(gaps))
        .map(|(v, g)| {
            t += g;
            (t, v)
        })
        .collect();
    PiecewiseLinear::new(knots).unwrap()
}

fn sorted(mut v: Vec<f64>, descending: bool) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    if descending {
        v.reverse();
    }
    v
}

proptest! {
    #[test]
    fn rate_is_inner_product(
        (a, s, e) in (-0.9f64..1.0, 0.0f64..10.0, 0.0f64..=1.0),
        (ds, da, de) in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
    ) {
        let k = KernelTriple::new(a, s, e).unwrap();
        let p = friction_partials(&k).unwrap();
        let r = friction_rate(&k, &TripleRates { d_sigma: ds, d_alpha: da, d_epsilon: de }).unwrap();
        let want = p.d_sigma * ds + p.d_alpha * da + p.d_epsilon * de;
        prop_assert!((r - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn stable_paths_have_monotone_friction(
        sigma in 0.0f64..5.0,
        alphas in prop::collection::vec(-0.9f64..1.0, 2..6),
        eps in prop::collection::vec(0.0f64..=1.0, 2..6),
        gaps in prop::collection::vec(0.1f64..3.0, 5),
    ) {
        let na = alphas.len();
        let ne = eps.len();
        let p = ParameterPath::new(
            PiecewiseLinear::constant(sigma),
            path(sorted(alphas, false), gaps[..na - 1].to_vec()),
            path(sorted(eps, true), gaps[..ne - 1].to_vec()),
        ).unwrap();
        let report = lyapunov_check(&p, 10.0, 200, sigma + 1.0).unwrap();
        prop_assert!(report.conditions_hold);
        prop_assert_eq!(report.friction_monotone, Some(true));
    }

    #[test]
    fn voice_only_rate_is_convex_combination(
        members in prop::collection::vec((0.01f64..10.0, 0.0f64..=1.0, -1.0f64..1.0), 1..6),
    ) {
        let d = DelegationDomain::new(
            members.iter().map(|&(s, v, _)| Stakeholder::new("m", s, 0.0, 0.0, v, true).unwrap()).collect(),
        );
        let rates: Vec<f64> = members.iter().map(|m| m.2).collect();
        let r = legitimacy_rate(&d, &rates, &vec![0.0; rates.len()]).unwrap();
        let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(r >= lo - 1e-12 && r <= hi + 1e-12);
    }
}
