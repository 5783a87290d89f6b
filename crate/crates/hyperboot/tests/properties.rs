use hyperboot::bounds::{discrete_coefficients, functional_polynomial, solve_cancellation};
use hyperboot::hypergeom::{pochhammer_pair, weyl_ladder_ratio, weyl_ladder_ratio_exact};
use hyperboot::orbifold::{dim_modular_forms, TopologicalType};
use hyperboot::recurrences::{p, p_values, q_poly, q_values};
use hyperboot::roots::real_roots;
use hyperboot::{q, qi, to_f64, Rational, UniPoly};
use num_traits::Zero;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-200i64..200, 1i64..50).prop_map(|(n, d)| q(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cancellation_always_solves(k in 1u32..8, a in prop::collection::vec(rational(), 1..6)) {
        let b = solve_cancellation(k, &a).unwrap();
        let d = discrete_coefficients(k, &a, &b).unwrap();
        prop_assert!(d.iter().all(Zero::is_zero));
    }

    #[test]
    fn functional_is_linear_in_weights(k in 1u32..6, a in prop::collection::vec(rational(), 1..5)) {
        let b = solve_cancellation(k, &a).unwrap();
        let poly = functional_polynomial(k, &a, &b).unwrap();
        let scaled: Vec<Rational> = a.iter().map(|x| x * qi(3)).collect();
        let b3 = solve_cancellation(k, &scaled).unwrap();
        let poly3 = functional_polynomial(k, &scaled, &b3).unwrap();
        prop_assert_eq!(poly3, poly.scale(&qi(3)));
    }

    #[test]
    fn point_values_match_polynomials(n in 0u32..10, lam in rational(), mu in rational()) {
        let vals = p_values(n, &lam, &mu);
        prop_assert_eq!(&vals[n as usize], &p(n).eval(&lam, &mu));
    }

    #[test]
    fn q_values_match_polynomials(k in 1u32..6, n in 0u32..10, mu in rational()) {
        let vals = q_values(k, n, &mu);
        prop_assert_eq!(&vals[n as usize], &q_poly(k, n).eval(&mu));
    }

    #[test]
    fn ladder_ratio_float_tracks_exact(n in 0u32..15, k in 1u32..8, lam in 0i64..4000) {
        let exact = weyl_ladder_ratio_exact(n, k, &q(lam, 100));
        let float = weyl_ladder_ratio(n, k, lam as f64 / 100.0);
        let e = to_f64(&exact);
        prop_assert!((float - e).abs() <= 1e-13 * e.abs().max(1e-300));
        prop_assert_eq!(pochhammer_pair(&q(lam, 100), n).is_zero(), lam == 0 && n > 0);
    }

    #[test]
    fn roots_of_products_of_linear_factors(roots in prop::collection::btree_set(-30i64..30, 1..6)) {
        let mut poly = UniPoly::constant(qi(1));
        for &r in &roots {
            poly = &poly * &UniPoly::new(vec![qi(-r), qi(1)]);
        }
        let found = real_roots(&poly, &q(1, 1000));
        prop_assert_eq!(found.len(), roots.len());
        for (e, &r) in found.iter().zip(roots.iter()) {
            prop_assert!(e.lo <= qi(r) && qi(r) <= e.hi);
        }
    }

    #[test]
    fn surface_dimensions_follow_riemann_roch(g in 2u32..8, k in 2u32..10) {
        let t = TopologicalType::surface(g).unwrap();
        prop_assert_eq!(dim_modular_forms(&t, k).unwrap(), ((2 * k - 1) * (g - 1)) as u64);
        prop_assert_eq!(dim_modular_forms(&t, 1).unwrap(), g as u64);
    }
}
