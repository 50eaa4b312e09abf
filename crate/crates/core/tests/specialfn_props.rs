use fracpearson::specialfn::{
    gamma::gamma, hyp1f1, hyp2f1, log_gamma, mittag_leffler, ComplexVal, SeriesConfig,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn mittag_leffler_two_sided_bound(alpha in 0.05f64..0.95, x in 1e-6f64..1e3) {
        let e = mittag_leffler(alpha, x).unwrap();
        let lower = 1.0 / (1.0 + gamma(1.0 - alpha) * x);
        let upper = 1.0 / (1.0 + x / gamma(1.0 + alpha));
        prop_assert!(e > 0.0 && e <= 1.0);
        prop_assert!(e >= lower * (1.0 - 1e-12) && e <= upper * (1.0 + 1e-12), "a={} x={} e={} [{}, {}]", alpha, x, e, lower, upper);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn gamma_recurrence(r in 0.5f64..30.0, phi in -3.1f64..3.1) {
        let z = ComplexVal::from_polar(r, phi);
        prop_assume!(!(z.im.abs() < 1e-3 && (z.re - z.re.round()).abs() < 1e-3 && z.re < 0.5));
        let lhs = log_gamma(z + 1.0).unwrap().exp();
        let rhs = z * log_gamma(z).unwrap().exp();
        prop_assert!((lhs - rhs).norm() <= 1e-11 * rhs.norm(), "z={}", z);
    }

    #[test]
    fn mittag_leffler_monotone(alpha in 0.05f64..1.0, x in 0.0f64..200.0, dx in 1e-3f64..10.0) {
        let a = mittag_leffler(alpha, x).unwrap();
        let b = mittag_leffler(alpha, x + dx).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-13));
    }
}

#[test]
fn exponential_limit_on_grid() {
    for i in 0..=500 {
        let x = 0.1 * i as f64;
        let e = mittag_leffler(1.0, x).unwrap();
        assert!((e - (-x).exp()).abs() <= 1e-12 * (-x).exp());
    }
}

#[test]
fn hypergeometric_at_zero_exactly_one() {
    let cfg = SeriesConfig::default();
    let a = ComplexVal::new(-1.3, 4.0);
    assert_eq!(
        hyp1f1(a, ComplexVal::new(2.0, -1.0), 0.0, &cfg).unwrap(),
        ComplexVal::new(1.0, 0.0)
    );
    assert_eq!(
        hyp2f1(a, a.conj(), 2.5, 0.0, &cfg).unwrap(),
        ComplexVal::new(1.0, 0.0)
    );
}

#[test]
fn domain_errors() {
    assert!(mittag_leffler(0.0, 1.0).is_err());
    assert!(mittag_leffler(1.2, 1.0).is_err());
    let cfg = SeriesConfig::default();
    assert!(hyp1f1(
        ComplexVal::new(1.0, 0.0),
        ComplexVal::new(-2.0, 0.0),
        1.0,
        &cfg
    )
    .is_err());
    assert!(hyp1f1(
        ComplexVal::new(1.0, 0.0),
        ComplexVal::new(2.0, 0.0),
        101.0,
        &cfg
    )
    .is_err());
}
