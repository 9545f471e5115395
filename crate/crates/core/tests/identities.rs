use approx::assert_relative_eq;
use proptest::prelude::*;
use slater_zeta::identities::*;

#[test]
fn registry_passes_on_fifty_draws() {
    for record in registry() {
        let report = verify_record(&record, 7, 50, None).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.draws, 50);
    }
}

#[test]
fn k2_weight_minus_half_sign() {
    for (a, b, c) in [(1.0, 1.0, 1.0), (0.3, 4.0, 2.0), (7.0, 0.2, 0.5)] {
        let pair = k2_weighted_integrals(K2Weight::MinusHalf, a, b, c, 1e-11).unwrap();
        assert!(pair.closed > 0.0 && pair.numeric.value > 0.0);
        assert!(pair.holds(1e-8), "{pair:?}");
    }
    assert_relative_eq!(k2_weighted_closed(K2Weight::MinusHalf, 1.0, 1.0, 1.0).unwrap(), 0.021_120_386_178_534_1, max_relative = 1e-12);
}

fn in_branch_point() -> impl Strategy<Value = (SqrtRatio, f64)> {
    (prop::array::uniform6(0.1f64..10.0), 0.05f64..20.0)
        .prop_filter("in branch", |(p, _)| SqrtRatio::new(p[0], p[1], p[2], p[3], p[4], p[5]).in_branch())
        .prop_map(|(p, x)| (SqrtRatio::new(p[0], p[1], p[2], p[3], p[4], p[5]), x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn antiderivative_differentiates_to_integrand((p, x) in in_branch_point()) {
        let h = 1e-4 * x;
        let f = |t: f64| sqrt_ratio_antiderivative(&p, t).unwrap().re;
        // Fourth-order central difference.
        let d = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let exact = p.integrand(x).unwrap();
        prop_assert!((d - exact).abs() <= 1e-6 * exact.abs(), "{d} vs {exact}");
        prop_assert!(sqrt_ratio_antiderivative(&p, x).unwrap().in_branch);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn integrand_representations_agree(a in 0.1f64..10.0, b in 0.1f64..10.0, c in 0.1f64..10.0, x in 0.01f64..50.0) {
        let [k, u, g] = k0_representations(a, b, c, x).unwrap();
        prop_assert!((k - u).abs() <= 1e-10 * k.abs() && (k - g).abs() <= 1e-10 * k.abs());
        for w in K2Weight::ALL {
            let [k, u, g] = k2_representations(w, a, b, c, x).unwrap();
            prop_assert!((k - u).abs() <= 1e-10 * k.abs() && (k - g).abs() <= 1e-10 * k.abs());
        }
    }

    #[test]
    fn k0_metamorphic_scaling(a in 0.1f64..10.0, b in 0.1f64..10.0, c in 0.1f64..10.0, kappa in 0.1f64..10.0) {
        let base = k0_singular_closed(a, b, c).unwrap();
        let scaled = k0_singular_closed(a / kappa, b, kappa * c).unwrap();
        prop_assert!((scaled - base / kappa.sqrt()).abs() <= 1e-13 * base);
    }

    #[test]
    fn substitution_family_holds(z in 0.01f64..20.0, e in prop::array::uniform3(0.1f64..5.0), x2 in 0.1f64..5.0) {
        let family = SubstitutionFamily::ThreeOrbital { zeta1: z, etas: e, x2 };
        prop_assert!(substitution_rule_check(&family));
    }
}

#[test]
fn k0_metamorphic_numeric() {
    let (a, b, c, kappa) = (1.3, 0.7, 2.1, 3.0);
    let base = k0_singular_integral(a, b, c, 1e-11).unwrap();
    let scaled = k0_singular_integral(a / kappa, b, kappa * c, 1e-11).unwrap();
    assert_relative_eq!(scaled.numeric.value, base.numeric.value / kappa.sqrt(), max_relative = 1e-9);
}

#[test]
fn exp_pair_profiles() {
    for profile in PbmProfile::ALL {
        for (p, q) in [(1.0, 1.0), (4.0, 1.0), (0.3, 7.0)] {
            let check = fixed_pbm(|t| profile.eval(t), p, q, 1e-9).unwrap();
            assert!(check.rel_error() <= 1e-6, "{}: {check:?}", profile.name());
            assert_relative_eq!(check.rhs.value, fixed_pbm_closed(profile, p, q), max_relative = 1e-9);
        }
    }
    assert_relative_eq!(fixed_pbm_closed(PbmProfile::Constant, 1.0, 1.0), 0.886_226_925_452_758, max_relative = 1e-14);
}
