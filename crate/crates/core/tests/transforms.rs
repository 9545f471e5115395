use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slater_zeta::transforms::{
    build_quadratic_form, c_prime, m_kernel, m_kernel_inverse, pair_kernel, reconstruct_m_kernel, reconstruct_m_kernel_mc,
    reconstruct_rho_integral, recursion_trio, recursion_trio_fd, KernelForm, ZetaKernel,
};

fn kernel(m: usize) -> impl Strategy<Value = ZetaKernel> {
    (prop::collection::vec(0.2f64..3.0, m), prop::collection::vec(0.2f64..3.0, m))
        .prop_map(|(rs, etas)| ZetaKernel::new(rs, etas).unwrap())
}

fn zetas(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..20.0, n)
}

fn random_kernel(rng: &mut ChaCha8Rng, m: usize) -> ZetaKernel {
    let rs = (0..m).map(|_| rng.random_range(0.2..3.0)).collect();
    let etas = (0..m).map(|_| rng.random_range(0.2..3.0)).collect();
    ZetaKernel::new(rs, etas).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn c_prime_lambda_is_omega(
        (k, z) in (2usize..=6).prop_flat_map(|m| (kernel(m), zetas(m - 1))),
        rho in 0.05f64..20.0,
    ) {
        let qf = build_quadratic_form(&k, &z, rho).unwrap();
        let c = c_prime(&qf).unwrap();
        let lhs = c * qf.lambda();
        prop_assert!((lhs - qf.omega_minors()).abs() <= 1e-12 * lhs.abs());
        prop_assert!((lhs - qf.omega_determinant()).abs() <= 1e-12 * lhs.abs());
    }

    #[test]
    fn inverse_form_jacobian((k, xi) in (2usize..=5).prop_flat_map(|m| (kernel(m), zetas(m - 1)))) {
        let z: Vec<f64> = xi.iter().map(|x| 1.0 / x).collect();
        let jac: f64 = xi.iter().map(|x| 1.0 / (x * x)).product();
        let lhs = m_kernel_inverse(&k, &xi).unwrap();
        let rhs = m_kernel(&k, &z).unwrap() * jac;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }

    #[test]
    fn kernel_positive((k, z) in (2usize..=8).prop_flat_map(|m| (kernel(m), zetas(m - 1)))) {
        prop_assert!(m_kernel(&k, &z).unwrap() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn recursion_matches_trio_kernel(k in kernel(3), z in zetas(2)) {
        let direct = m_kernel(&k, &z).unwrap();
        let rec = recursion_trio(&k, &z).unwrap();
        prop_assert!((direct - rec).abs() <= 1e-10 * direct, "{direct} vs {rec}");
        let fd = recursion_trio_fd(&k, &z, 1e-6 * k.a(&z)).unwrap();
        prop_assert!((fd - rec).abs() <= 1e-6 * rec, "{fd} vs {rec}");
    }

    #[test]
    fn pair_kernel_is_m2(k in kernel(2), z in 0.05f64..20.0) {
        let a = pair_kernel(&k, z).unwrap();
        let b = m_kernel(&k, &[z]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn rho_form_integrates_to_compact((k, z) in (2usize..=4).prop_flat_map(|m| (kernel(m), zetas(m - 1)))) {
        let c = reconstruct_rho_integral(&k, &z, 1e-10).unwrap();
        prop_assert!(c.holds(1e-8), "{c:?}");
    }
}

#[test]
fn deterministic_reconstruction_m2_m3() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for m in [2, 3] {
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let k = random_kernel(&mut rng, m);
            let c = reconstruct_m_kernel(&k, KernelForm::Compact, 1e-9).unwrap();
            worst = worst.max(c.rel_error());
        }
        assert!(worst <= 1e-6, "M={m}: {worst:e}");
    }
}

#[test]
fn other_forms_reconstruct() {
    let k = ZetaKernel::uniform(3, 1.0, 1.0).unwrap();
    let c = reconstruct_m_kernel(&k, KernelForm::Inverse, 1e-9).unwrap();
    assert_relative_eq!(c.numeric.value, (-3.0f64).exp(), max_relative = 1e-7);
    let k = ZetaKernel::uniform(2, 1.0, 1.0).unwrap();
    let c = reconstruct_m_kernel(&k, KernelForm::Rho, 1e-9).unwrap();
    assert_relative_eq!(c.numeric.value, (-2.0f64).exp(), max_relative = 1e-7);
}

#[test]
fn monte_carlo_reconstruction_m4_m5() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for m in [4, 5] {
        for i in 0..2 {
            let k = random_kernel(&mut rng, m);
            let c = reconstruct_m_kernel_mc(&k, i, 200_000).unwrap();
            assert!(c.rel_error() <= 1e-3, "M={m}: {c:?}");
            assert_eq!(c, reconstruct_m_kernel_mc(&k, i, 200_000).unwrap());
        }
    }
}

#[test]
fn quadratic_form_examples() {
    let k = ZetaKernel::uniform(2, 1.0, 1.0).unwrap();
    let qf = build_quadratic_form(&k, &[1.0], 1.0).unwrap();
    assert_eq!(qf.c_const, 2.0);
    assert_eq!(qf.b_sq, vec![-0.25, -0.25]);
    assert_relative_eq!(c_prime(&qf).unwrap(), 2.5, max_relative = 1e-15);
    let k = ZetaKernel::uniform(3, 1.0, 1.0).unwrap();
    let qf = build_quadratic_form(&k, &[2.0, 3.0], 1.0).unwrap();
    assert_eq!(qf.c_const, 6.0);
    assert_eq!(qf.lambda(), 6.0);
    let qf = build_quadratic_form(&k, &[1.0, 1.0], 1.0).unwrap();
    assert_relative_eq!(c_prime(&qf).unwrap(), 3.75, max_relative = 1e-15);
    let far = build_quadratic_form(&k, &[1.0, 1.0], 1e8).unwrap();
    assert_relative_eq!(c_prime(&far).unwrap(), far.c_const, max_relative = 1e-15);
}
