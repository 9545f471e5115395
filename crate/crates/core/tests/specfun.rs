use approx::assert_relative_eq;
use proptest::prelude::*;
use slater_zeta::specfun::{bessel_k, bessel_k_scaled, meijer_g2002, tricomi_u_special, Order};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Ascending series for K₀ with its explicit logarithm.
fn k0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut term, mut harmonic) = (1.0, 0.0);
    let (mut i0, mut rest) = (1.0, 0.0);
    for k in 1..200 {
        term *= q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        i0 += term;
        rest += term * harmonic;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -((x / 2.0).ln() + EULER_GAMMA) * i0 + rest
}

fn recurrence_orders() -> impl Strategy<Value = u32> {
    prop_oneof![Just(1u32), Just(2), Just(3), Just(4)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn k_recurrence(z in 0.1f64..100.0, twice in recurrence_orders()) {
        let nu = twice as f64 / 2.0;
        let up = bessel_k_scaled(Order::from_twice(twice as i32 + 2), z).unwrap();
        let down = bessel_k_scaled(Order::from_twice(twice as i32 - 2), z).unwrap();
        let mid = bessel_k_scaled(Order::from_twice(twice as i32), z).unwrap();
        let lhs = up - down;
        let rhs = 2.0 * nu / z * mid;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs(), "nu={nu} z={z}: {lhs} vs {rhs}");
    }

    #[test]
    fn u_closure(z in 0.05f64..300.0, two in any::<bool>()) {
        let nu = if two { Order::TWO } else { Order::ZERO };
        let v = nu.value();
        let u = tricomi_u_special(nu, 2.0 * z).unwrap();
        let lhs = std::f64::consts::PI.sqrt() * (2.0 * z).powf(v) * (-z).exp() * u;
        let k = bessel_k(nu, z).unwrap();
        prop_assert!((lhs - k).abs() <= 1e-10 * k, "{lhs} vs {k}");
    }

    #[test]
    fn k_decreasing_and_positive(z in 0.1f64..600.0, twice in 0u32..=6) {
        let nu = Order::from_twice(twice as i32);
        let a = bessel_k(nu, z).unwrap();
        let b = bessel_k(nu, z * 1.01).unwrap();
        prop_assert!(a > 0.0 && b > 0.0 && b < a);
    }

    #[test]
    fn scaled_consistency(z in 0.1f64..650.0, twice in 0u32..=4) {
        let nu = Order::from_twice(twice as i32);
        let k = bessel_k(nu, z).unwrap();
        let s = bessel_k_scaled(nu, z).unwrap() * (-z).exp();
        prop_assert!((k - s).abs() <= 1e-12 * k);
    }
}

#[test]
fn g_reduction_against_series() {
    for i in 0..20 {
        let z = 0.01 + 0.2 * i as f64;
        let g = meijer_g2002(z, Order::ZERO).unwrap();
        let series = 2.0 * k0_series(2.0 * z.sqrt());
        assert_relative_eq!(g, series, max_relative = 1e-10);
    }
}

#[test]
fn g_reduction_half_order() {
    for z in [0.3, 1.0, 4.0, 25.0] {
        let g = meijer_g2002(z, Order::HALF).unwrap();
        assert_relative_eq!(g, 2.0 * bessel_k(Order::ONE, 2.0 * f64::sqrt(z)).unwrap(), max_relative = 1e-15);
    }
    assert_relative_eq!(meijer_g2002(1.0, Order::HALF).unwrap(), 0.279_731_8, max_relative = 1e-6);
}

#[test]
fn reference_values() {
    assert_relative_eq!(bessel_k(Order::ZERO, 1.0).unwrap(), 0.421_024_438_240_708_3, max_relative = 1e-13);
    assert_relative_eq!(bessel_k(Order::TWO, 1.0).unwrap(), 1.624_838_898_635_177_4, max_relative = 1e-13);
    assert_relative_eq!(bessel_k(Order::HALF, 1.0).unwrap(), (std::f64::consts::PI / 2.0).sqrt() / 1f64.exp(), max_relative = 1e-15);
    let expect = 1f64.exp() * bessel_k(Order::ZERO, 1.0).unwrap() / std::f64::consts::PI.sqrt();
    assert_relative_eq!(tricomi_u_special(Order::ZERO, 2.0).unwrap(), expect, max_relative = 1e-12);
    assert_relative_eq!(expect, 0.645_694_148_382, max_relative = 1e-11);
    assert!(bessel_k(Order::ZERO, 0.0).is_err());
    assert!(tricomi_u_special(Order::ONE, 1.0).is_err());
}
