use posstable::specfun::{gamma, sin_pi};
use posstable::specfun::{
    mittag_leffler, mittag_leffler_by, mittag_leffler_prime, mittag_leffler_prime_by, u_alpha,
    v_alpha, Regime, StabilityIndex,
};

fn al(a: f64) -> StabilityIndex {
    StabilityIndex::new(a).unwrap()
}

// Frozen 50-digit values from a 400-term mpmath series.
const ML_ORACLE: &[(f64, f64, f64, f64)] = &[
    // (alpha, y, E_alpha(-y), E'_alpha(-y))
    (0.5, 2.0, 0.255_395_676_310_505_75, 0.106_796_461_853_489_6),
    (
        0.7,
        3.0,
        0.137_897_109_665_027_08,
        0.051_288_185_329_773_195,
    ),
    (0.3, 1.0, 0.456_594_408_329_690_67, 0.257_722_663_433_632_26),
];

#[test]
fn oracle_values() {
    for &(a, y, e, d) in ML_ORACLE {
        let got = mittag_leffler(al(a), -y).unwrap();
        assert!(
            (got.value - e).abs() <= 1e-12,
            "E_{a}(-{y}) = {}",
            got.value
        );
        assert!(got.abs_error_estimate <= 1e-10);
        let got = mittag_leffler_prime(al(a), -y).unwrap();
        assert!(
            (got.value - d).abs() <= 1e-12,
            "E'_{a}(-{y}) = {}",
            got.value
        );
    }
}

#[test]
fn series_and_quadrature_agree_on_overlap() {
    for a in [0.3, 0.5, 0.7] {
        for i in 1..=20 {
            let y = 0.1 * i as f64;
            let s = mittag_leffler_by(al(a), -y, Regime::Series).unwrap();
            let q = mittag_leffler_by(al(a), -y, Regime::Integral).unwrap();
            assert!((s.value - q.value).abs() <= 1e-8, "a={a} y={y}");
            let s = mittag_leffler_prime_by(al(a), -y, Regime::Series).unwrap();
            let q = mittag_leffler_prime_by(al(a), -y, Regime::Integral).unwrap();
            assert!(
                (s.value - q.value).abs() <= 1e-8,
                "a={a} y={y} (derivative)"
            );
        }
    }
}

#[test]
fn quadrature_and_asymptotic_agree_at_switchover() {
    for a in [0.3, 0.5, 0.7, 0.9] {
        for y in [1e3, 3e3, 1e4] {
            let q = mittag_leffler_by(al(a), -y, Regime::Integral).unwrap();
            let s = mittag_leffler_by(al(a), -y, Regime::Asymptotic).unwrap();
            assert!(
                (s.value - q.value).abs() <= 1e-12 * q.value.abs(),
                "a={a} y={y}"
            );
            let q = mittag_leffler_prime_by(al(a), -y, Regime::Integral).unwrap();
            let s = mittag_leffler_prime_by(al(a), -y, Regime::Asymptotic).unwrap();
            assert!(
                (s.value - q.value).abs() <= 1e-11 * q.value.abs(),
                "a={a} y={y} (derivative)"
            );
        }
    }
}

#[test]
fn decreasing_and_positive_on_negative_axis() {
    for a in [0.1, 0.3, 0.5, 0.7, 0.95] {
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let y = 0.25 * i as f64;
            let e = mittag_leffler(al(a), -y).unwrap().value;
            assert!(e > 0.0 && e < prev, "a={a} y={y}");
            prev = e;
        }
    }
}

#[test]
fn leading_asymptotic_term() {
    // Γ(1-α) y E_α(-y) = 1 - Γ(1-α)/(Γ(1-2α) y) + O(y^-2), so the check is
    // made at y = 10^4 where the correction is below 1e-3 for both α.
    for a in [0.3, 0.7] {
        let y = 1e4;
        let e = mittag_leffler(al(a), -y).unwrap().value;
        let ratio = y * e * gamma(1.0 - a);
        assert!((ratio - 1.0).abs() <= 1e-3, "a={a}: {ratio}");
        let second = gamma(1.0 - a) / gamma(1.0 - 2.0 * a) / y;
        assert!((ratio - (1.0 - second)).abs() <= 1e-6, "a={a}: {ratio}");
    }
}

#[test]
fn u_bounds() {
    for a in [0.1, 0.3, 0.5] {
        for k in -30..=60 {
            let x = 10f64.powf(k as f64 / 10.0);
            assert!(u_alpha(al(a), x).unwrap() <= 1.0 + 1e-12, "a={a} x={x}");
        }
    }
    let u = u_alpha(al(0.3), 1e6).unwrap();
    assert!(u <= 1.0 && u > 0.99);
    for a in [0.55, 0.75, 0.9] {
        let cap = 1.0 / sin_pi(a).powi(2);
        for k in -30..=60 {
            let x = 10f64.powf(k as f64 / 10.0);
            assert!(u_alpha(al(a), x).unwrap() <= cap, "a={a} x={x}");
        }
    }
}

#[test]
fn v_bounds_and_reference_value() {
    let mut sup: f64 = 0.0;
    for k in -30..=60 {
        let x = 10f64.powf(k as f64 / 10.0);
        sup = sup.max(v_alpha(al(0.4), x).unwrap());
    }
    assert!(sup <= 1.0);
    let mut sup: f64 = 0.0;
    for k in -30..=60 {
        let x = 10f64.powf(k as f64 / 10.0);
        sup = sup.max(v_alpha(al(0.75), x).unwrap());
    }
    assert!(sup <= 2.0 && sup > 1.0);
    // 30-digit quadrature of the defining integral
    let v = v_alpha(al(0.7), 2.0).unwrap();
    assert!((v - 1.231_528_719_763_8).abs() < 1e-11, "{v}");
}

#[test]
fn u_branches_are_continuous() {
    for a in [0.3, 0.7] {
        let below = u_alpha(al(a), 5.0).unwrap();
        let above = u_alpha(al(a), 5.0 * (1.0 + 1e-12)).unwrap();
        assert!((below - above).abs() < 1e-10);
    }
}
