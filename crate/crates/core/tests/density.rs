#![allow(clippy::excessive_precision)]

use posstable::density::{
    boundary_limits, mellin_exact, power_density, stable_density, stable_density_prime,
    BoundaryClass, PowerExponent, StableLaw,
};
use posstable::specfun::{gamma, rgamma};
use posstable::{Regime, StabilityIndex};
use proptest::prelude::*;
use std::f64::consts::PI;

fn al(a: f64) -> StabilityIndex {
    StabilityIndex::new(a).unwrap()
}

fn pe(r: f64) -> PowerExponent {
    PowerExponent::new(r).unwrap()
}

// (alpha, x, f, f', 1 - F) from tests/oracles/gen_oracles.py
const ORACLE: &[(f64, f64, f64, f64, f64)] = &[
    (
        0.3,
        1.0,
        0.117_157_002_565_916_15,
        -0.125_379_799_227_455_69,
        0.567_551_258_993_695_03,
    ),
    (
        0.3,
        0.2,
        0.572_906_208_837_652_13,
        -2.526_718_751_853_320_8,
        0.758_767_992_087_578_21,
    ),
    (
        0.7,
        2.0,
        0.107_688_344_874_337_13,
        -0.102_023_310_004_456_76,
        0.257_920_622_434_779_7,
    ),
    (
        0.7,
        0.5,
        0.965_119_118_469_361_76,
        -1.111_264_174_209_927_4,
        0.783_223_249_327_236_35,
    ),
    (
        0.9,
        0.8,
        2.054_167_460_836_843_5,
        -6.282_702_420_161_920_4,
        0.652_866_904_680_270_5,
    ),
    (
        0.9,
        3.0,
        0.023_564_159_838_575_613,
        -0.020_487_309_578_177_923,
        0.055_760_791_677_273_451,
    ),
    (
        0.5,
        1.0,
        0.219_695_644_733_862_85,
        -0.274_619_555_917_347_1,
        0.520_499_877_813_046_68,
    ),
    (
        0.2,
        0.05,
        1.329_538_225_369_115_2,
        -23.084_922_606_930_614,
        0.810_461_851_482_770_95,
    ),
];

#[test]
fn oracle_values() {
    for &(a, x, f, fp, sf) in ORACLE {
        let law = StableLaw::new(al(a));
        let p = law.point(x).unwrap();
        assert!(
            (p.f - f).abs() <= 1e-11 * f,
            "a={a} x={x}: f={} ({:?})",
            p.f,
            p.regime
        );
        assert!(
            (p.f - f).abs() <= p.f_abs_error.max(1e-15 * f) * 10.0,
            "a={a} x={x}: error estimate"
        );
        assert!(
            (p.f_prime() - fp).abs() <= 1e-10 * fp.abs(),
            "a={a} x={x}: f'={}",
            p.f_prime()
        );
        let (cdf, s) = law.cdf_sf(x).unwrap();
        assert!((s - sf).abs() <= 1e-11, "a={a} x={x}: sf={s}");
        assert!((cdf + s - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn closed_form_one_half() {
    let c = 1.0 / (2.0 * PI.sqrt());
    let f = stable_density(al(0.5), 1.0).unwrap();
    assert!((f.value - c * (-0.25f64).exp()).abs() < 1e-14);
    let d = stable_density_prime(al(0.5), 1.0).unwrap();
    assert!((d.value - c * (-0.25f64).exp() * (-1.5 + 0.25)).abs() < 1e-13);
}

#[test]
fn branches_agree_on_overlap() {
    for a in [0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95] {
        let law = StableLaw::new(al(a));
        let xs = law.series_threshold();
        for k in -6..=6 {
            let x = xs * (k as f64 / 4.0).exp();
            let s = law.point_by(x, Regime::Series);
            let q = law.point_by(x, Regime::Integral).unwrap();
            // The overlap is where the series itself claims accuracy.
            let Ok(s) = s else { continue };
            if s.f_abs_error > 1e-10 * s.f {
                continue;
            }
            assert!(
                (s.f - q.f).abs() <= 1e-8 * q.f,
                "a={a} x={x}: {} vs {}",
                s.f,
                q.f
            );
            assert!(
                (s.f_prime() - q.f_prime()).abs() <= 1e-8 * q.f_prime().abs(),
                "a={a} x={x}: {} vs {}",
                s.f_prime(),
                q.f_prime()
            );
        }
    }
}

#[test]
fn normalisation() {
    for a in [0.2, 0.5, 0.8] {
        let m = StableLaw::new(al(a)).mellin(0.0).unwrap();
        assert!((m - 1.0).abs() <= 1e-8, "a={a}: {m}");
    }
}

#[test]
fn laplace_identity() {
    for a in [0.2, 0.3, 0.5, 0.8] {
        let law = StableLaw::new(al(a));
        for lambda in [0.5f64, 1.0, 2.0] {
            let got = law.laplace(lambda).unwrap();
            let want = (-lambda.powf(a)).exp();
            assert!(
                (got - want).abs() <= 1e-7,
                "a={a} l={lambda}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn h_transform_duality() {
    // ∫ e^{-λx} h^r(x) dx = (αλ^α - r) e^{-λ^α}
    for (a, r) in [(0.3, -0.5), (0.7, 1.5), (0.8, -1.0)] {
        let law = StableLaw::new(al(a));
        for lambda in [0.5f64, 1.0, 2.0] {
            let got = law
                .laplace_with(lambda, |p| p.f * ((1.0 - r) - p.elasticity))
                .unwrap();
            let la = lambda.powf(a);
            let want = (a * la - r) * (-la).exp();
            assert!(
                (got - want).abs() <= 1e-6,
                "a={a} r={r} l={lambda}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn mellin_matches_closed_form() {
    for (a, s) in [
        (0.5, -1.0),
        (0.3, 0.1),
        (0.6, 0.3),
        (0.7, -2.5),
        (0.9, 0.85),
        (0.2, -0.5),
    ] {
        let got = StableLaw::new(al(a)).mellin(s).unwrap();
        let want = mellin_exact(al(a), s).unwrap();
        assert!(
            (got - want).abs() <= 1e-8 * want,
            "a={a} s={s}: {got} vs {want}"
        );
    }
    // E[Z_{1/2}^{-1}] = Γ(3) = 2
    assert!((mellin_exact(al(0.5), -1.0).unwrap() - 2.0).abs() < 1e-14);
    assert!(StableLaw::new(al(0.5)).mellin(0.5).is_err());
}

#[test]
fn derivative_matches_differences() {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..20 {
        let a = 0.1 + 0.85 * next();
        let law = StableLaw::new(al(a));
        // Points where f is not vanishingly small: around the bulk.
        let x = (4.0 * next() - 1.5).exp();
        let h = 1e-5 * x;
        let fp = (law.point(x + h).unwrap().f - law.point(x - h).unwrap().f) / (2.0 * h);
        let p = law.point(x).unwrap();
        assert!(
            (fp - p.f_prime()).abs() <= 1e-6 * p.f_prime().abs().max(1e-3 * p.f / x),
            "a={a} x={x}: {fp} vs {}",
            p.f_prime()
        );
    }
}

#[test]
fn log_derivative_tail() {
    for a in [0.3, 0.7] {
        let law = StableLaw::new(al(a));
        let x = 1e8;
        let p = law.point(x).unwrap();
        let ratio = p.f_prime() / p.f * x;
        assert!((ratio + a + 1.0).abs() < 1e-3, "a={a}: {ratio}");
    }
}

#[test]
fn single_mode_at_alpha_point_seven() {
    let law = StableLaw::new(al(0.7));
    let mut changes = 0;
    let mut prev = None;
    for i in 0..2000 {
        let x = (-5.0 + 15.0 * i as f64 / 2000.0).exp();
        let s = law.point(x).unwrap().elasticity < 0.0;
        if let Some(p) = prev {
            if p != s {
                changes += 1;
            }
        }
        prev = Some(s);
    }
    assert_eq!(changes, 1);
}

#[test]
fn power_density_identities() {
    let law = StableLaw::new(al(0.5));
    for x in [0.05, 0.3, 1.0, 4.0, 20.0] {
        let got = law.power_density(pe(-0.5), x).unwrap();
        let want = (-x * x / 4.0).exp() / PI.sqrt();
        assert!((got - want).abs() < 1e-12, "x={x}");
    }
    for x in [0.1, 1.0, 7.0] {
        let a = power_density(al(0.4), pe(1.0), x).unwrap();
        let b = stable_density(al(0.4), x).unwrap().value;
        assert_eq!(a, b);
    }
    let v = power_density(al(0.6), pe(-0.6), 1e-6).unwrap();
    assert!((v - rgamma(0.4)).abs() < 1e-5);
}

#[test]
fn boundary_limit_values() {
    let b = boundary_limits(al(0.5), pe(-0.5));
    assert_eq!(b.class, BoundaryClass::FinitePositive);
    assert!((b.value - 1.0 / PI.sqrt()).abs() < 1e-15);
    assert_eq!(b.derivative, Some(-0.0));

    let b = boundary_limits(al(0.7), pe(-0.7));
    assert!((b.value - rgamma(0.3)).abs() < 1e-15);
    let slope = b.derivative.unwrap();
    // Γ(-0.4) < 0, so the slope is positive.
    assert!(gamma(-0.4) < 0.0 && slope > 0.0);
    // Finite differences of the power density near 0.
    let law = StableLaw::new(al(0.7));
    for x in [1e-3, 1e-4] {
        let d = (law.power_density(pe(-0.7), 2.0 * x).unwrap()
            - law.power_density(pe(-0.7), x).unwrap())
            / x;
        assert!(
            (d - slope).abs() < 1e-2 * slope.abs(),
            "x={x}: {d} vs {slope}"
        );
    }

    let b = boundary_limits(al(0.4), pe(2.0));
    assert_eq!(
        (b.class, b.value, b.derivative),
        (BoundaryClass::Zero, 0.0, None)
    );
    assert_eq!(
        boundary_limits(al(0.4), pe(-1.0)).class,
        BoundaryClass::Infinite
    );
}

#[test]
fn h_signs() {
    let law = StableLaw::new(al(0.3));
    for i in 0..400 {
        let x = (-4.0 + 14.0 * i as f64 / 400.0).exp();
        let p = law.point(x).unwrap();
        assert!(p.f * ((1.0 + 0.5) - p.elasticity) >= -1e-14, "x={x}");
    }
    let law = StableLaw::new(al(0.8));
    let neg = (0..400).any(|i| {
        let x = (-4.0 + 14.0 * i as f64 / 400.0).exp();
        law.h(-1.0, x).unwrap() < 0.0
    });
    assert!(neg);
}

#[test]
fn g_requires_positive_r() {
    let law = StableLaw::new(al(0.4));
    assert!(law.g(-1.0, 1.0).is_err());
    let g = law.g(0.4, 1.0).unwrap();
    let h = law.h(-0.4, 1.0).unwrap();
    assert_eq!(g, h / 0.4);
}

#[test]
fn domain_errors() {
    assert!(stable_density(al(0.5), 0.0).is_err());
    assert!(stable_density(al(0.5), -1.0).is_err());
    assert!(stable_density(al(0.5), f64::NAN).is_err());
}

#[test]
fn extreme_alpha_does_not_produce_nan() {
    let law = StableLaw::new(al(0.999));
    for x in [1e-3, 0.5, 0.9, 1.0, 1.1, 3.0] {
        let p = law.point(x).unwrap();
        assert!(
            p.f.is_finite() && p.f >= 0.0 && !p.ln_f.is_nan(),
            "x={x}: {p:?}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn density_positive_and_finite(a in 0.05f64..0.95, lx in -3.0f64..12.0) {
        let law = StableLaw::new(al(a));
        let p = law.point_ln(lx).unwrap();
        prop_assert!(p.f >= 0.0 && p.f.is_finite());
        prop_assert!(p.ln_f.is_finite());
        let (c, s) = law.cdf_sf(lx.exp()).unwrap();
        prop_assert!((0.0..=1.0).contains(&c) && (0.0..=1.0).contains(&s));
    }
}
