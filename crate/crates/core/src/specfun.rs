//! Gamma helpers, the Mittag-Leffler function on the negative axis and the
//! two derived functions whose suprema give the frontier curves R̃ and R̂.
//!
//! `E_α(-y)` is evaluated by one of three methods:
//!
//! * the power series `Σ (-y)^n / Γ(1+αn)` while its cancellation loss is
//!   negligible (never beyond `y = 5`);
//! * the Laplace-type integral obtained from the stable representation with
//!   the substitution `v = t^{1/α}`, which is smooth at the origin:
//!   `E_α(-y) = sin(πα)/(πα) ∫_0^∞ exp(-t^{1/α}) y / ((t + y cos πα)² + y² sin² πα) dt`;
//! * the asymptotic expansion `Σ_k (-1)^{k+1} y^{-k} / Γ(1-αk)` beyond `y = 10^3`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::Quadrature;

/// Distance kept from the degenerate endpoints α ∈ {0, 1}.
pub const ALPHA_GUARD: f64 = 1e-6;

pub const SERIES_MAX_Y: f64 = 5.0;
pub const ASYMPTOTIC_MIN_Y: f64 = 1e3;

/// Stable exponent α ∈ (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StabilityIndex(f64);

impl StabilityIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && (ALPHA_GUARD..=1.0 - ALPHA_GUARD).contains(&alpha) {
            Ok(StabilityIndex(alpha))
        } else {
            Err(Error::InvalidAlpha(alpha))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The complementary index `1 - α`.
    #[inline]
    pub fn beta(self) -> f64 {
        1.0 - self.0
    }

    /// Whether α lies in the identity zone `α <= 1/2` where all three
    /// frontier curves coincide with α.
    #[inline]
    pub fn in_identity_zone(self) -> bool {
        self.0 <= 0.5
    }
}

impl TryFrom<f64> for StabilityIndex {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        StabilityIndex::new(v)
    }
}

impl From<StabilityIndex> for f64 {
    fn from(a: StabilityIndex) -> f64 {
        a.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Series,
    Integral,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub regime: Regime,
    /// Set when the true value is below the smallest normal double and was
    /// flushed to zero.
    pub underflow: bool,
}

impl EvalResult {
    pub(crate) fn new(value: f64, abs_error_estimate: f64, regime: Regime) -> Self {
        EvalResult {
            value,
            abs_error_estimate,
            regime,
            underflow: false,
        }
    }
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        -(PI * (r - 1.0)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// `cos(πx)`, exact zero at half-integers.
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// Γ(x) for all real x, through the reflection formula below 1/2. Poles
/// return infinity with the sign of the right-hand limit.
pub fn gamma(x: f64) -> f64 {
    if x >= 0.5 {
        statrs::function::gamma::gamma(x)
    } else {
        let s = sin_pi(x);
        if s == 0.0 {
            return f64::INFINITY;
        }
        PI / (s * statrs::function::gamma::gamma(1.0 - x))
    }
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    statrs::function::gamma::ln_gamma(x)
}

/// 1/Γ(x), an entire function: exactly zero at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 170.0 {
        return (-ln_gamma(x)).exp();
    }
    if x < -170.0 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        return sin_pi(x) / PI * (ln_gamma(1.0 - x)).exp();
    }
    1.0 / gamma(x)
}

/// Whether to evaluate E_α or its derivative E'_α.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Order {
    Value,
    Derivative,
}

fn check_nonpositive(x: f64) -> Result<f64> {
    if x.is_nan() || x > 0.0 {
        return Err(Error::Domain {
            what: "x",
            value: x,
            domain: "(-inf, 0]",
        });
    }
    Ok(-x)
}

/// Mittag-Leffler function `E_α(x)` for `x <= 0`.
pub fn mittag_leffler(alpha: StabilityIndex, x: f64) -> Result<EvalResult> {
    let y = check_nonpositive(x)?;
    ml_auto(alpha, y, Order::Value)
}

/// Derivative `E'_α(x)` for `x <= 0`.
pub fn mittag_leffler_prime(alpha: StabilityIndex, x: f64) -> Result<EvalResult> {
    let y = check_nonpositive(x)?;
    ml_auto(alpha, y, Order::Derivative)
}

/// Forces a particular evaluation method; used to cross-check the regimes
/// on their overlap.
pub fn mittag_leffler_by(alpha: StabilityIndex, x: f64, regime: Regime) -> Result<EvalResult> {
    let y = check_nonpositive(x)?;
    ml_by(alpha, y, Order::Value, regime)
}

pub fn mittag_leffler_prime_by(
    alpha: StabilityIndex,
    x: f64,
    regime: Regime,
) -> Result<EvalResult> {
    let y = check_nonpositive(x)?;
    ml_by(alpha, y, Order::Derivative, regime)
}

fn ml_by(alpha: StabilityIndex, y: f64, order: Order, regime: Regime) -> Result<EvalResult> {
    match regime {
        Regime::Series => Ok(ml_series(alpha.value(), y, order)),
        Regime::Integral => ml_integral(alpha.value(), y, order),
        Regime::Asymptotic => Ok(ml_asymptotic(alpha.value(), y, order)),
    }
}

fn ml_auto(alpha: StabilityIndex, y: f64, order: Order) -> Result<EvalResult> {
    let a = alpha.value();
    if y <= SERIES_MAX_Y {
        let s = ml_series(a, y, order);
        if s.abs_error_estimate <= 1e-12 {
            return Ok(s);
        }
    }
    if y >= ASYMPTOTIC_MIN_Y {
        let s = ml_asymptotic(a, y, order);
        if s.abs_error_estimate <= 1e-15 * s.value.abs() {
            return Ok(s);
        }
    }
    ml_integral(a, y, order)
}

fn ml_series(a: f64, y: f64, order: Order) -> EvalResult {
    let (first, shift) = match order {
        Order::Value => (1.0, 0),
        Order::Derivative => (rgamma(1.0 + a), 1),
    };
    if y == 0.0 {
        return EvalResult::new(first, 0.0, Regime::Series);
    }
    let ln_y = y.ln();
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut n = shift;
    let mut tail = 0.0;
    while n < 5000 {
        let nf = n as f64;
        // n-th term of Σ (-y)^n/Γ(1+αn), or n(-y)^{n-1}/Γ(1+αn). Direct
        // powers and Γ are more accurate than exp(n ln y - ln Γ).
        let p = match order {
            Order::Value => n,
            Order::Derivative => n - 1,
        };
        let arg = 1.0 + a * nf;
        let mag = if arg < 170.0 && (p as f64) * ln_y.abs() < 700.0 {
            let m = y.powi(p) / gamma(arg);
            if order == Order::Derivative {
                nf * m
            } else {
                m
            }
        } else {
            let l = (p as f64) * ln_y - ln_gamma(arg);
            if order == Order::Derivative {
                (nf.ln() + l).exp()
            } else {
                l.exp()
            }
        };
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * mag;
        abs_sum += mag;
        if mag < prev && mag <= 1e-17 * sum.abs().max(1e-300) {
            tail = mag;
            break;
        }
        prev = mag;
        n += 1;
    }
    // Each term carries a few ulps from powi and Γ on top of the summation.
    let rounding = 16.0 * f64::EPSILON * abs_sum;
    EvalResult::new(sum, tail + rounding, Regime::Series)
}

fn ml_asymptotic(a: f64, y: f64, order: Order) -> EvalResult {
    let mut sum: f64 = 0.0;
    let mut err = f64::INFINITY;
    for k in 1..=40 {
        let kf = k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let (term, bound) = match order {
            Order::Value => (
                sign * y.powf(-kf) * rgamma(1.0 - a * kf),
                y.powf(-kf) * gamma(a * kf) / PI,
            ),
            Order::Derivative => (
                sign * kf * y.powf(-kf - 1.0) * rgamma(1.0 - a * kf),
                kf * y.powf(-kf - 1.0) * gamma(a * kf) / PI,
            ),
        };
        if bound >= err {
            // Terms started growing: the expansion is exhausted.
            break;
        }
        if bound <= 1e-17 * sum.abs() {
            err = bound;
            break;
        }
        sum += term;
        err = bound;
    }
    EvalResult::new(sum, err, Regime::Asymptotic)
}

/// Upper end of the t-range where `exp(-t^{1/α})` is representable.
fn t_max(a: f64) -> f64 {
    745f64.powf(a)
}

fn ml_integral(a: f64, y: f64, order: Order) -> Result<EvalResult> {
    let s = sin_pi(a);
    let c = cos_pi(a);
    let pref = s / (PI * a);
    let t_hi = t_max(a);
    let inv_a = 1.0 / a;

    let mut pts = vec![0.0, t_hi];
    if t_hi > 1.0 {
        pts.push(1.0);
    }
    // Lorentzian peak of the kernel when cos πα < 0.
    let peak = -y * c;
    let width = y * s;
    if peak > 0.0 {
        for p in [
            peak - 4.0 * width,
            peak - width,
            peak,
            peak + width,
            peak + 4.0 * width,
        ] {
            if p > 0.0 && p < t_hi {
                pts.push(p);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let q = Quadrature {
        epsabs: 0.0,
        epsrel: 1e-13,
        max_intervals: 4000,
    };
    let r = match order {
        Order::Value => q.integrate_pts(
            |t| {
                let d = (t + y * c).powi(2) + width * width;
                (-t.powf(inv_a)).exp() * y / d
            },
            &pts,
        ),
        Order::Derivative => q.integrate_pts(
            |t| {
                let d = (t + y * c).powi(2) + width * width;
                (-t.powf(inv_a)).exp() * (y - t) * (y + t) / (d * d)
            },
            &pts,
        ),
    };
    let value = pref * r.value[0];
    let err = pref * r.abs_error[0] + 4.0 * f64::EPSILON * value.abs();
    if !r.converged && err > 1e-10 * value.abs().max(1e-300) {
        return Err(Error::Accuracy {
            estimate: value,
            abs_error: err,
        });
    }
    Ok(EvalResult::new(value, err, Regime::Integral))
}

fn check_nonnegative(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain {
            what: "x",
            value: x,
            domain: "[0, inf)",
        });
    }
    Ok(())
}

/// `U_α(x) = Γ(1-α) x E_α(-x)`.
pub fn u_alpha(alpha: StabilityIndex, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let a = alpha.value();
    if x <= SERIES_MAX_Y {
        let e = ml_auto(alpha, x, Order::Value)?;
        return Ok(gamma(1.0 - a) * x * e.value);
    }
    // U_α(y) = 1/Γ(1+α) ∫ exp(-s^{1/α}) / ((s/y + cos πα)² + sin² πα) ds,
    // a positive integrand with no small-times-large products.
    let kernel = kernel_integral(a, x, |s, inv_a| (-s.powf(inv_a)).exp())?;
    Ok(kernel * rgamma(1.0 + a))
}

/// `V_α(x) = x^{2α} Γ(1-α) E'_α(-x^α)`.
pub fn v_alpha(alpha: StabilityIndex, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    v_of_y(alpha, x.powf(alpha.value()))
}

/// `V_α` in the variable `y = x^α`, i.e. `y² Γ(1-α) E'_α(-y)`.
pub fn v_of_y(alpha: StabilityIndex, y: f64) -> Result<f64> {
    check_nonnegative(y)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    let a = alpha.value();
    if y <= SERIES_MAX_Y {
        let e = ml_auto(alpha, y, Order::Derivative)?;
        return Ok(gamma(1.0 - a) * y * y * e.value);
    }
    // V = 1/(αΓ(1+α)) ∫ s^{1/α} exp(-s^{1/α}) / ((s/y + cos πα)² + sin² πα) ds
    let kernel = kernel_integral(a, y, |s, inv_a| {
        let p = s.powf(inv_a);
        p * (-p).exp()
    })?;
    Ok(kernel * rgamma(1.0 + a) / a)
}

fn kernel_integral<W>(a: f64, y: f64, weight: W) -> Result<f64>
where
    W: Fn(f64, f64) -> f64,
{
    let s_pi = sin_pi(a);
    let c = cos_pi(a);
    let inv_a = 1.0 / a;
    let hi = t_max(a);
    let mut pts = vec![0.0, hi];
    if hi > 1.0 {
        pts.push(1.0);
    }
    let peak = -y * c;
    if peak > 0.0 {
        let width = y * s_pi;
        for p in [peak - width, peak, peak + width] {
            if p > 0.0 && p < hi {
                pts.push(p);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let q = Quadrature {
        epsabs: 0.0,
        epsrel: 1e-13,
        max_intervals: 4000,
    };
    let r = q.integrate_pts(
        |s| {
            let z = s / y + c;
            weight(s, inv_a) / (z * z + s_pi * s_pi)
        },
        &pts,
    );
    if !r.converged && r.abs_error[0] > 1e-10 * r.value[0].abs() {
        return Err(Error::Accuracy {
            estimate: r.value[0],
            abs_error: r.abs_error[0],
        });
    }
    Ok(r.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(a: f64) -> StabilityIndex {
        StabilityIndex::new(a).unwrap()
    }

    #[test]
    fn guard_rejects_endpoints() {
        assert!(StabilityIndex::new(0.0).is_err());
        assert!(StabilityIndex::new(1.0).is_err());
        assert!(StabilityIndex::new(1.0 - 1e-7).is_err());
        assert!(StabilityIndex::new(f64::NAN).is_err());
        assert!(StabilityIndex::new(1.0 - 1e-6).is_ok());
    }

    #[test]
    fn gamma_keeps_sign_for_negative_arguments() {
        // Γ(-0.4) = Γ(0.6)/(-0.4)
        let g = gamma(-0.4);
        assert!(g < 0.0);
        assert!((g - gamma(0.6) / -0.4).abs() < 1e-13 * g.abs());
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        assert!((rgamma(1.0 / 2.0) - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn value_at_origin() {
        for a in [0.1, 0.5, 0.93] {
            let e = mittag_leffler(al(a), 0.0).unwrap();
            assert_eq!(e.value, 1.0);
            let d = mittag_leffler_prime(al(a), 0.0).unwrap();
            assert!((d.value - rgamma(1.0 + a)).abs() < 1e-15);
        }
    }

    #[test]
    fn positive_argument_is_rejected() {
        assert!(mittag_leffler(al(0.5), 0.1).is_err());
        assert!(u_alpha(al(0.5), -1.0).is_err());
    }

    #[test]
    fn exponential_limit() {
        let a = al(1.0 - 1e-6);
        let e = mittag_leffler(a, -1.0).unwrap();
        assert!((e.value - (-1f64).exp()).abs() < 1e-5);
        let d = mittag_leffler_prime(a, -1.0).unwrap();
        assert!((d.value - (-1f64).exp()).abs() < 1e-5);
    }

    #[test]
    fn erfc_closed_form_at_one_half() {
        // E_{1/2}(-z) = exp(z²) erfc(z), evaluated at 40 digits.
        let cases = [
            (0.3, 0.734_599_334_567_655_2),
            (2.0, 0.255_395_676_310_505_74),
            (7.5, 0.074_573_693_062_876_68),
            (40.0, 0.014_100_335_983_377_814),
            (2e3, 2.820_947_565_120_424e-4),
        ];
        for (z, want) in cases {
            let got = mittag_leffler(al(0.5), -z).unwrap();
            assert!(
                (got.value - want).abs() <= 1e-12 * want,
                "z={z}: {} vs {want} ({:?})",
                got.value,
                got.regime
            );
            assert!(
                (got.value - want).abs() <= got.abs_error_estimate.max(1e-15),
                "z={z}: err {} est {}",
                (got.value - want).abs(),
                got.abs_error_estimate
            );
        }
    }

    #[test]
    fn regimes_selected_by_magnitude() {
        assert_eq!(
            mittag_leffler(al(0.7), -1.0).unwrap().regime,
            Regime::Series
        );
        assert_eq!(
            mittag_leffler(al(0.7), -20.0).unwrap().regime,
            Regime::Integral
        );
        assert_eq!(
            mittag_leffler(al(0.7), -1e4).unwrap().regime,
            Regime::Asymptotic
        );
    }

    #[test]
    fn u_and_v_vanish_at_origin() {
        assert_eq!(u_alpha(al(0.3), 0.0).unwrap(), 0.0);
        assert_eq!(v_alpha(al(0.3), 0.0).unwrap(), 0.0);
    }
}
