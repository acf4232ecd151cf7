//! The Kanter function
//!
//! `b_α(u) = sin u / (sin(αu)^α sin(βu)^β)`, `β = 1 - α`, on `(0, π)`,
//!
//! its first two derivatives, the functions `A_c(u) = c cot(cu) - cot u`
//! and numerical certificates for the inequalities that make `b_α`
//! decreasing and concave.
//!
//! With `L ~ Exp(1)` and `U ~ Unif(0, π)` independent,
//! `Z_α = L^{-β/α} b_α(U)^{e}` with `e` = [`kanter_exponent`].

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::specfun::StabilityIndex;

/// Candidate exponents `e(α)` for the multiplier `b_α(U)^{e(α)}`, as
/// `(label, e)`; the sampler calibration keeps the one reproducing the
/// Laplace transform `exp(-λ^α)`.
pub fn exponent_candidates(alpha: StabilityIndex) -> Vec<(&'static str, f64)> {
    let a = alpha.value();
    let mut out: Vec<(&'static str, f64)> = Vec::new();
    for (label, e) in [
        ("-1/alpha", -1.0 / a),
        ("(alpha-1)/alpha", (a - 1.0) / a),
        ("-(1-alpha)/alpha", -(1.0 - a) / a),
    ] {
        // The last two are the same number written differently.
        if !out
            .iter()
            .any(|&(_, f)| (f - e).abs() <= 4.0 * f64::EPSILON * e.abs())
        {
            out.push((label, e));
        }
    }
    out
}

/// Frozen multiplier exponent: `Z_α = L^{(α-1)/α} b_α(U)^{-1/α}`.
pub const KANTER_EXPONENT_LABEL: &str = "-1/alpha";

#[inline]
pub fn kanter_exponent(alpha: StabilityIndex) -> f64 {
    -1.0 / alpha.value()
}

/// `|γ_k|` in `cot z = 1/z - Σ_k |γ_k| z^{2k-1}`, i.e. `2ζ(2k)/π^{2k}`.
const COT_COEFFS: [f64; 15] = [
    0.333_333_333_333_333_3,
    0.022_222_222_222_222_223,
    0.002_116_402_116_402_116_5,
    0.000_211_640_211_640_211_65,
    2.137_779_915_557_693_5e-5,
    2.164_404_280_806_397_2e-6,
    2.192_594_785_187_377_8e-7,
    2.221_460_878_997_967_8e-8,
    2.250_784_651_680_899_4e-9,
    2.280_515_120_459_218_3e-10,
    2.310_643_259_900_262_4e-11,
    2.341_170_681_982_488_2e-12,
    2.372_101_740_023_365_3e-13,
    2.403_441_533_330_770_5e-14,
    2.435_195_402_918_336_7e-15,
];

/// Below this angle `A_c` and `A_c'` are summed from their power series.
const SERIES_U: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KanterEval {
    pub u: f64,
    pub b: f64,
    pub b_prime: f64,
    pub b_second: f64,
}

fn check_u(u: f64) -> Result<()> {
    if u.is_nan() || u <= 0.0 || u >= PI {
        return Err(Error::Domain {
            what: "u",
            value: u,
            domain: "(0, pi)",
        });
    }
    Ok(())
}

fn check_c(c: f64) -> Result<()> {
    if c.is_nan() || c <= 0.0 || c > 1.0 {
        return Err(Error::Domain {
            what: "c",
            value: c,
            domain: "(0, 1]",
        });
    }
    Ok(())
}

/// Low part of π: `PI + PI_LO` is π to about 32 digits.
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

/// `A_c(u) = c cot(cu) - cot u` without checks.
fn a_raw(c: f64, u: f64) -> f64 {
    if u < SERIES_U {
        let u2 = u * u;
        let c2 = c * c;
        let mut cp = c2;
        let mut up = u;
        let mut s = 0.0;
        for g in COT_COEFFS {
            s += g * (1.0 - cp) * up;
            cp *= c2;
            up *= u2;
        }
        s
    } else {
        c / (c * u).tan() - 1.0 / u.tan()
    }
}

/// `A_c'(u) = -c² csc²(cu) + csc² u`.
fn a_prime_raw(c: f64, u: f64) -> f64 {
    if u < SERIES_U {
        let u2 = u * u;
        let c2 = c * c;
        let mut cp = c2;
        let mut up = 1.0;
        let mut s = 0.0;
        for (k, g) in COT_COEFFS.iter().enumerate() {
            s += g * (1.0 - cp) * (2 * k + 1) as f64 * up;
            cp *= c2;
            up *= u2;
        }
        s
    } else {
        let sc = (c * u).sin();
        let su = u.sin();
        -c * c / (sc * sc) + 1.0 / (su * su)
    }
}

/// `A_c(u) = c cot(cu) - cot(u)` for `c ∈ (0, 1]`, `u ∈ (0, π)`.
pub fn a_alpha(c: f64, u: f64) -> Result<f64> {
    check_c(c)?;
    check_u(u)?;
    Ok(a_raw(c, u))
}

/// Derivative of [`a_alpha`] in `u`.
pub fn a_alpha_prime(c: f64, u: f64) -> Result<f64> {
    check_c(c)?;
    check_u(u)?;
    Ok(a_prime_raw(c, u))
}

/// `b_α(0+) = α^{-α} β^{-β}`.
pub fn b_at_zero(alpha: StabilityIndex) -> f64 {
    let a = alpha.value();
    let b = alpha.beta();
    (-a * a.ln() - b * b.ln()).exp()
}

/// `ln b_α(u)` for `u ∈ [0, π)`; the origin gives the limit value.
pub fn ln_b(alpha: StabilityIndex, u: f64) -> f64 {
    let a = alpha.value();
    let b = alpha.beta();
    if u == 0.0 {
        return -a * a.ln() - b * b.ln();
    }
    if u < 1e-4 {
        // ln(sin u/u) - α ln(sin αu/(αu)) - β ln(sin βu/(βu)) - α ln α - β ln β,
        // with ln(sin x/x) = -x²/6 - x⁴/180.
        let l = |x: f64| {
            let x2 = x * x;
            -x2 / 6.0 - x2 * x2 / 180.0
        };
        return l(u) - a * l(a * u) - b * l(b * u) - a * a.ln() - b * b.ln();
    }
    u.sin().ln() - a * (a * u).sin().ln() - b * (b * u).sin().ln()
}

/// `ln(sin x / x)`.
fn ln_sinc(x: f64) -> f64 {
    if x < 1e-3 {
        let x2 = x * x;
        -x2 / 6.0 - x2 * x2 / 180.0 - x2 * x2 * x2 / 2835.0
    } else {
        (x.sin() / x).ln()
    }
}

/// `ln(b_α(u) / b_α(0+))` given both `u` and `v = π - u`, so that either
/// endpoint can be approached without losing the small one to rounding.
/// Behaves like `-αβu²/2` at the origin and like `ln v` near π.
pub fn ln_b_ratio(alpha: StabilityIndex, u: f64, v: f64) -> f64 {
    let a = alpha.value();
    let b = alpha.beta();
    let first = if v < u {
        (v.sin() / u).ln()
    } else {
        ln_sinc(u)
    };
    first - a * ln_sinc(a * u) - b * ln_sinc(b * u)
}

/// `b_α(u)` together with `b'` and `b''`.
pub fn b_alpha(alpha: StabilityIndex, u: f64) -> Result<KanterEval> {
    check_u(u)?;
    Ok(b_alpha_raw(alpha, u))
}

fn b_alpha_raw(alpha: StabilityIndex, u: f64) -> KanterEval {
    let a = alpha.value();
    let be = alpha.beta();
    let b = ln_b(alpha, u).exp();
    if u < SERIES_U {
        // (ln b)' = -(αA_α + βA_β), (ln b)'' = -(αA_α' + βA_β')
        let l1 = -(a * a_raw(a, u) + be * a_raw(be, u));
        let l2 = -(a * a_prime_raw(a, u) + be * a_prime_raw(be, u));
        KanterEval {
            u,
            b,
            b_prime: b * l1,
            b_second: b * (l1 * l1 + l2),
        }
    } else {
        // Written so that the 1/(π-u)² terms cancel analytically near π:
        // b' = cos u / D - bS,
        // b'' = b(S² - 1 + α³csc²(αu) + β³csc²(βu)) - 2S cos u / D,
        // with S = α² cot(αu) + β² cot(βu), D = sin(αu)^α sin(βu)^β.
        let sa = (a * u).sin();
        let sb = (be * u).sin();
        let s = a * a * (a * u).cos() / sa + be * be * (be * u).cos() / sb;
        let d = (a * sa.ln() + be * sb.ln()).exp();
        let cd = u.cos() / d;
        let b_prime = cd - b * s;
        let b_second =
            b * (s * s - 1.0 + a.powi(3) / (sa * sa) + be.powi(3) / (sb * sb)) - 2.0 * s * cd;
        KanterEval {
            u,
            b,
            b_prime,
            b_second,
        }
    }
}

/// Partial-fraction form of `αA_α(u) - βA_β(u)` from the Euler expansion
/// `π cot(πw) = 1/w + Σ 2w/(w² - n²)`, with `z = u/π`:
///
/// `2αβ(β - α) z/π · Σ_{n≥1} n²(n² + (1+αβ)z²) / ((z² - n²)(α²z² - n²)(β²z² - n²))`.
///
/// Every summand is negative, so the sign is that of `α - β`. The summands
/// behave like `-1/n²`; that part is summed in closed form (`π²/6`) and the
/// remainder decays like `n^{-4}`. Returns `(value, tail_bound, terms)`.
pub fn euler_certificate(
    alpha: StabilityIndex,
    u: f64,
    tail_tol: f64,
) -> Result<(f64, f64, usize)> {
    check_u(u)?;
    let a = alpha.value();
    let b = alpha.beta();
    let z = u / PI;
    let z2 = z * z;
    let pref = 2.0 * a * b * (b - a) * z / PI;
    if pref == 0.0 {
        return Ok((0.0, 0.0, 0));
    }
    let ab = a * b;
    // Remainder summand: (-(3-αβ)z²n⁴ + e2 n² - e3) / (n² P(n)) with
    // P(n) = (n² - z²)(n² - α²z²)(n² - β²z²) ≥ (27/64)n⁶ for n ≥ 2, so it is
    // at most 9.78 z²/n⁴ and the tail after N terms at most 3.26 z²/N³.
    let tail_coef = pref.abs() * 3.26 * z2;
    let n_terms = ((tail_coef / tail_tol).cbrt().ceil() as usize).clamp(2, 1_000_000);
    let (a2z2, b2z2) = (a * a * z2, b * b * z2);
    let c4 = (3.0 - ab) * z2;
    let e2 = z2 * z2 * (a * a + b * b + a * a * b * b);
    let e3 = a2z2 * b2z2 * z2;
    // 1 - z² from π - u with π in two parts; as u → π this factor carries
    // the whole size of the sum.
    let w = ((PI - u) + PI_LO) / PI;
    let one_minus_z2 = w * (2.0 - w);
    let mut s = 0.0;
    for n in (1..=n_terms).rev() {
        let n2 = (n * n) as f64;
        let first = if n == 1 { one_minus_z2 } else { n2 - z2 };
        let p = first * (n2 - a2z2) * (n2 - b2z2);
        s += (-c4 * n2 * n2 + e2 * n2 - e3) / (n2 * p);
    }
    s -= PI * PI / 6.0;
    let tail = tail_coef / (n_terms as f64).powi(3);
    Ok((pref * s, tail, n_terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateReport {
    pub alpha: f64,
    pub grid: usize,
    /// max b'(u); expected ≤ 0.
    pub max_b_prime: f64,
    /// max b''(u); expected ≤ 0.
    pub max_b_second: f64,
    /// max of α²cot(αu)A_α + β²cot(βu)A_β - αβ; expected ≤ 0.
    pub max_ineq3: f64,
    /// max of (A_α - A_β)(αA_α - βA_β); expected ≤ 0.
    pub max_ineq4: f64,
    /// max of sign(β - α)·(certificate value + tail); expected ≤ 0.
    pub max_certificate: f64,
    /// max |certificate - (αA_α - βA_β)| relative to max(1, |αA_α|).
    pub max_certificate_mismatch: f64,
}

impl CertificateReport {
    /// Largest positive excess over any of the four sign conditions.
    pub fn max_violation(&self) -> f64 {
        [
            self.max_b_prime,
            self.max_b_second,
            self.max_ineq3,
            self.max_ineq4,
            self.max_certificate,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Endpoint exclusion for grid checks.
pub const GRID_GUARD: f64 = 1e-8;

/// Checks monotonicity/concavity of `b_α` and the two inequalities on a
/// uniform grid of `grid` points over `[1e-8, π - 1e-8]`.
pub fn check_certificates(alpha: StabilityIndex, grid: usize) -> Result<CertificateReport> {
    check_certificates_with(alpha, grid, Exec::default())
}

pub fn check_certificates_with(alpha: StabilityIndex, grid: usize, exec: Exec) -> Result<CertificateReport> {
    if grid < 2 {
        return Err(Error::Precondition(format!(
            "grid must be at least 2, got {grid}"
        )));
    }
    let a = alpha.value();
    let be = alpha.beta();
    let lo = GRID_GUARD;
    let hi = PI - GRID_GUARD;
    let step = (hi - lo) / (grid - 1) as f64;
    let sign = if a < be { 1.0 } else { -1.0 };
    let rows = par::map_indexed(exec, grid, |i| {
        let u = if i + 1 == grid {
            hi
        } else {
            lo + step * i as f64
        };
        let k = b_alpha_raw(alpha, u);
        let aa = a_raw(a, u);
        let ab = a_raw(be, u);
        // cot(cu) A_c stays bounded at 0 (A_c ~ u); use c cot(cu) = A_c + cot u
        // only away from 0.
        let ineq3 = a * a / (a * u).tan() * aa + be * be / (be * u).tan() * ab - a * be;
        let diff = a * aa - be * ab;
        let ineq4 = (aa - ab) * diff;
        let (cert, tail, _) = euler_certificate(alpha, u, 1e-13).expect("u inside (0, pi)");
        let scale = (a * aa).abs().max(1.0);
        let mismatch = (cert - diff).abs() / scale;
        let cert_signed = if cert == 0.0 { 0.0 } else { sign * cert + tail };
        [k.b_prime, k.b_second, ineq3, ineq4, cert_signed, mismatch]
    });
    let mut m = [f64::NEG_INFINITY; 6];
    for r in rows {
        for j in 0..6 {
            m[j] = m[j].max(r[j]);
        }
    }
    Ok(CertificateReport {
        alpha: a,
        grid,
        max_b_prime: m[0],
        max_b_second: m[1],
        max_ineq3: m[2],
        max_ineq4: m[3],
        max_certificate: m[4],
        max_certificate_mismatch: m[5],
    })
}
