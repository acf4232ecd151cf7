use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use posstable::cmlab::*;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

// tests/oracles/gen_cmlab.py: G^{(n)}(λ) for n = 1..5.
const ORACLE: [(&str, &str, f64, [f64; 5]); 6] = [
    (
        "3/4",
        "4/3",
        0.3,
        [
            -0.4991137395202792,
            0.23700490638077998,
            -0.41050446366337745,
            4.173697445129384,
            -57.25269632039813,
        ],
    ),
    (
        "3/4",
        "4/3",
        1.0,
        [
            -0.36787944117144233,
            0.16094725551250602,
            -0.06322927895134164,
            0.00862217440245568,
            0.00107777180030696,
        ],
    ),
    (
        "3/4",
        "4/3",
        2.5,
        [
            -0.1896237042738217,
            0.08334501392608062,
            -0.038138610551397646,
            0.01718701008808369,
            -0.0057594300041298304,
        ],
    ),
    (
        "1/3",
        "1",
        1.0,
        [
            -0.12262648039048077,
            0.08175098692698718,
            -0.12262648039048077,
            0.29975361873228634,
            -1.024915150917969,
        ],
    ),
    (
        "2/5",
        "7/10",
        0.3,
        [
            -0.1411350213889776,
            0.03270821928231194,
            0.4988416062323031,
            -7.344277745728478,
            110.58079220297827,
        ],
    ),
    (
        "2/5",
        "7/10",
        2.5,
        [
            -0.062326332117291335,
            0.016754951377798418,
            -0.008375380310973348,
            0.006536803283599484,
            -0.007021875166047152,
        ],
    ),
];

#[test]
fn exact_derivatives_match_oracle() {
    for (a, t, lam, want) in ORACLE {
        let g = ExpPolySum::g(q(a), q(t)).unwrap();
        for n in 1..=5 {
            let got = g.derivative(n).eval(lam);
            let w = want[n as usize - 1];
            assert!(
                (got - w).abs() <= 1e-12 * w.abs(),
                "({a},{t}) n={n} λ={lam}: {got} vs {w}"
            );
        }
    }
}

#[test]
fn unit_alpha_closed_form() {
    // G_{1,t}^{(n)} = (-1)^n e^{-λ} (λ + t - n)
    for t in ["2", "1/2", "7/3"] {
        let g = ExpPolySum::g(BigRational::one(), q(t)).unwrap();
        for n in 0..9u32 {
            let mut by_power: BTreeMap<i64, BigRational> = BTreeMap::new();
            for (&(j, k), c) in &g.derivative(n).terms {
                *by_power
                    .entry(j as i64 - k as i64)
                    .or_insert_with(BigRational::zero) += c;
            }
            by_power.retain(|_, c| !c.is_zero());
            let sign = if n % 2 == 0 {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            let mut want = BTreeMap::new();
            want.insert(1, sign.clone());
            let c0 = &sign * (q(t) - BigRational::from_integer(n.into()));
            if !c0.is_zero() {
                want.insert(0, c0);
            }
            assert_eq!(by_power, want, "t={t} n={n}");
        }
    }
}

#[test]
fn zeroth_derivative_is_identity() {
    let g = ExpPolySum::g(q("3/4"), q("4/3")).unwrap();
    assert_eq!(g.derivative(0), g);
}

#[test]
fn fifth_order_polynomial_at_three_quarters() {
    let (poly, power) = q_polynomial(&q("3/4"), &q("4/3"), 5).unwrap();
    assert_eq!(power, q("-1/2"));
    let (content, prim) = poly.primitive();
    assert_eq!(content, q("3/1024"));
    let prim: Vec<i64> = prim.iter().map(|c| c.to_i64().unwrap()).collect();
    assert_eq!(prim, vec![81, -27, -135, -150, 35, 195]);
    assert_eq!(poly.eval(&q("4/5")), q("-47937/640000"));
    assert_eq!(poly.eval(&q("4/5")) / content, q("-15979/625"));
}

#[test]
fn three_quarters_fails_first_at_order_five() {
    let r = cm_check(&q("3/4"), &q("4/3"), 5).unwrap();
    assert_eq!(r.first_failing_order, Some(5));
    assert_eq!(r.orders.len(), 5);
    for o in &r.orders[..4] {
        assert!(
            matches!(o.decision, SignDecision::NonNegative { .. }),
            "{o:?}"
        );
    }
    let mu = q(r.witness_mu.as_deref().unwrap());
    let (poly, _) = q_polynomial(&q("3/4"), &q("4/3"), 5).unwrap();
    assert!(poly.eval(&mu).is_negative());
    let lam = r.witness_lambda.unwrap();
    assert!((lam - mu.to_f64().unwrap().powf(-4.0 / 3.0)).abs() < 1e-12 * lam);
}

#[test]
fn unit_alpha_fails_at_order_three() {
    let r = cm_check(&BigRational::one(), &q("2"), 3).unwrap();
    assert_eq!(r.first_failing_order, Some(3));
    // the witness λ = 1/2 from the closed form: e^{-1/2}(1/2 + 2 - 3) < 0
    let (poly, _) = q_polynomial(&BigRational::one(), &q("2"), 3).unwrap();
    assert!(poly.eval(&q("2")).is_negative());
}

#[test]
fn identity_zone_passes_to_order_twelve() {
    for a in ["1/3", "1/2", "1/5"] {
        let r = cm_check(&q(a), &BigRational::one(), 12).unwrap();
        assert!(r.passed(), "alpha={a}: {:?}", r.first_failing_order);
        assert_eq!(r.orders.len(), 12);
    }
}

#[test]
fn below_threshold_fails_at_finite_order() {
    // t < 1 for α ≤ 1/2 is outside the completely monotone range.
    let r = cm_check(&q("1/3"), &q("9/10"), 12).unwrap();
    let n = r
        .first_failing_order
        .expect("expected a failure by order 12");
    assert!(n <= 12);
    assert!(r.inconclusive_order.is_none());
}

#[test]
fn max_order_must_be_positive() {
    assert!(cm_check(&q("1/2"), &q("1"), 0).is_err());
    assert!(ExpPolySum::g(q("0"), q("1")).is_err());
    assert!(ExpPolySum::g(q("3/2"), q("1")).is_err());
}

#[test]
fn log_convexity_thresholds() {
    let th = log_convexity_threshold(&q("3/4")).unwrap();
    assert_eq!(th.t_threshold, q("4/3"));
    for i in 1..=9 {
        let a = BigRational::new(i.into(), 10.into());
        let t = log_convexity_threshold(&a).unwrap().t_threshold;
        let bound = &a * t;
        let half = q("1/2");
        let want = if a <= half {
            a.clone()
        } else {
            BigRational::one() / (q("4") * (BigRational::one() - &a))
        };
        assert_eq!(bound, want, "alpha={a}");
    }
    assert_eq!(
        &q("9/10") * log_convexity_threshold(&q("9/10")).unwrap().t_threshold,
        q("5/2")
    );
    assert!(log_convexity_threshold(&q("1")).is_err());
}

#[test]
fn log_convex_densities() {
    assert!(log_convex_density_check(&q("2/5"), &q("1/2")).unwrap());
    assert!(!log_convex_density_check(&q("3/5"), &q("1/2")).unwrap());
    assert!(log_convex_density_check(&q("0"), &q("1/4")).is_err());
    assert!(log_convex_density_check(&q("1/2"), &q("-1")).is_err());
    // every point with r ≥ 1/4 and α ≤ 1 - 1/(4r) is log-convex
    for (a, r) in [
        ("1/10", "1/4"),
        ("1/2", "1/2"),
        ("3/4", "1"),
        ("9/10", "5/2"),
        ("7/10", "5/6"),
    ] {
        assert!(log_convex_density_check(&q(a), &q(r)).unwrap(), "({a}, {r})");
    }
}

fn fd_derivative(f: &dyn Fn(f64) -> f64, x: f64, n: u32) -> f64 {
    // central difference of order n, two Richardson steps
    let d = |h: f64| -> f64 {
        let mut s = 0.0;
        let mut binom = 1.0;
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom * f(x + (n as f64 / 2.0 - k as f64) * h);
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        s / h.powi(n as i32)
    };
    let h = 0.08 * x;
    let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivative_composes(p in 1i64..12, extra in 1i64..12, tn in 0i64..20, td in 1i64..7, n in 0u32..7) {
        let alpha = BigRational::new(p.into(), (p + extra).into());
        let t = BigRational::new(tn.into(), td.into());
        let g = ExpPolySum::g(alpha, t).unwrap();
        prop_assert_eq!(g.derivative(n + 1), g.derivative(n).differentiate());
    }

    #[test]
    fn matches_finite_differences(p in 1i64..10, extra in 1i64..10, tn in 1i64..20, lam in 0.3f64..4.0, n in 1u32..5) {
        let alpha = BigRational::new(p.into(), (p + extra).into());
        let t = BigRational::new(tn.into(), 4.into());
        let (af, tf) = (alpha.to_f64().unwrap(), t.to_f64().unwrap());
        let g = ExpPolySum::g(alpha, t).unwrap();
        let exact = g.derivative(n).eval(lam);
        let f = move |x: f64| (x.powf(af) + tf) * (-x.powf(af)).exp();
        let fd = fd_derivative(&f, lam, n);
        let scale = exact.abs().max(1e-3 * g.derivative(n).terms.values().map(|c| c.to_f64().unwrap().abs()).fold(0.0, f64::max) * (-lam.powf(af)).exp() * lam.powf(-(n as f64)));
        prop_assert!((fd - exact).abs() <= 1e-5 * scale, "n={} λ={} exact={} fd={}", n, lam, exact, fd);
    }
}
