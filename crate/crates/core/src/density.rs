//! Density `f_α` of the positive stable law with Laplace transform
//! `exp(-λ^α)`, its derivative, distribution function, power transforms and
//! Mellin moments.
//!
//! Two representations are used.
//!
//! * For `x` below a per-α threshold, the Kanter form. With
//!   `κ = α/(1-α)`, `φ(u) = b_α(u)^{-1/(1-α)}` and `w(u) = φ(u) x^{-κ}`,
//!
//!   `f(x) = κ/(πx) ∫_0^π w e^{-w} du`,
//!   `x f'(x) = -κ/(πx) ∫_0^π ((1+κ) w - κ w²) e^{-w} du`,
//!   `F(x) = 1/π ∫_0^π e^{-w} du`.
//!
//!   The integrals are scaled by `e^{w_0}`, `w_0 = w(0+)`, so the log-density
//!   and the elasticity `-x f'/f` stay exact deep in the left tail where `f`
//!   itself underflows.
//! * Above the threshold, the convergent series
//!   `f(x) = Σ_{n≥1} a_n x^{-αn-1}`, `a_n = (-1)^{n-1} Γ(1+αn) sin(παn)/(π n!)`.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::kanter::{self, ln_b_ratio};
use crate::quad::Quadrature;
use crate::specfun::{ln_gamma, rgamma, sin_pi, EvalResult, Regime, StabilityIndex};

/// Power `r ≠ 0` applied to `Z_α`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PowerExponent(f64);

impl PowerExponent {
    pub fn new(r: f64) -> Result<Self> {
        if r.is_finite() && r != 0.0 {
            Ok(PowerExponent(r))
        } else {
            Err(Error::InvalidExponent(r))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PowerExponent {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        PowerExponent::new(v)
    }
}

impl From<PowerExponent> for f64 {
    fn from(r: PowerExponent) -> f64 {
        r.0
    }
}

/// Behaviour of `f_α^r` at `0+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    Zero,
    FinitePositive,
    Infinite,
}

impl BoundaryClass {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryClass::Zero => "zero",
            BoundaryClass::FinitePositive => "finite_positive",
            BoundaryClass::Infinite => "infinite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Monotone,
    UnimodalNonmonotone,
    NotUnimodal,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Monotone => "monotone",
            Verdict::UnimodalNonmonotone => "unimodal_nonmonotone",
            Verdict::NotUnimodal => "not_unimodal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub boundary_class: BoundaryClass,
    pub interior_maxima: usize,
    pub verdict: Verdict,
}

/// Relative tolerance used to decide `r = -α`.
pub const EXPONENT_MATCH_TOL: f64 = 1e-12;

pub fn boundary_class(alpha: StabilityIndex, r: PowerExponent) -> BoundaryClass {
    let a = alpha.value();
    let r = r.value();
    if (r + a).abs() <= EXPONENT_MATCH_TOL * a {
        BoundaryClass::FinitePositive
    } else if r > -a {
        BoundaryClass::Zero
    } else {
        BoundaryClass::Infinite
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryLimits {
    pub class: BoundaryClass,
    /// `f_α^r(0+)`: 0, `1/Γ(1-α)` or `+∞`.
    pub value: f64,
    /// `(f_α^r)'(0+)`, only defined when the limit is finite and positive.
    pub derivative: Option<f64>,
}

/// Limits of the power density at the origin.
///
/// For `r = -α`, `f_α^{-α}(x) = (1/α) Σ a_n x^{n-1}` is analytic at 0, so
/// the value is `a_1/α = 1/Γ(1-α)` and the slope `a_2/α = -1/Γ(1-2α)`.
pub fn boundary_limits(alpha: StabilityIndex, r: PowerExponent) -> BoundaryLimits {
    let a = alpha.value();
    match boundary_class(alpha, r) {
        BoundaryClass::Zero => BoundaryLimits {
            class: BoundaryClass::Zero,
            value: 0.0,
            derivative: None,
        },
        BoundaryClass::Infinite => BoundaryLimits {
            class: BoundaryClass::Infinite,
            value: f64::INFINITY,
            derivative: None,
        },
        BoundaryClass::FinitePositive => BoundaryLimits {
            class: BoundaryClass::FinitePositive,
            value: rgamma(1.0 - a),
            derivative: Some(-rgamma(1.0 - 2.0 * a)),
        },
    }
}

/// Everything known about `f_α` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    pub x: f64,
    pub ln_x: f64,
    /// `ln f(x)`, finite even when `f` underflows.
    pub ln_f: f64,
    pub f: f64,
    /// `-x f'(x) / f(x)`.
    pub elasticity: f64,
    pub f_abs_error: f64,
    /// Absolute error of the elasticity.
    pub elasticity_error: f64,
    pub regime: Regime,
    pub underflow: bool,
}

impl DensityPoint {
    pub fn f_prime(&self) -> f64 {
        -self.elasticity * self.f / self.x
    }

    pub fn f_prime_abs_error(&self) -> f64 {
        (self.elasticity.abs() * self.f_abs_error + self.elasticity_error * self.f) / self.x
    }
}

/// Evaluator for one α, carrying the series threshold.
#[derive(Debug, Clone, Copy)]
pub struct StableLaw {
    alpha: StabilityIndex,
    kappa: f64,
    ln_phi0: f64,
    x_star: f64,
}

const TARGET_REL: f64 = 1e-12;
const SERIES_MAX_TERMS: usize = 4000;
/// Accept the series once its error estimate is below this, relative.
const SERIES_ACCEPT: f64 = 1e-13;
/// Integration stops where `w - w_0` exceeds this: `e^{-760}` is below the
/// smallest subnormal relative to the peak.
const EXP_CUTOFF: f64 = 760.0;

fn threshold_cache() -> &'static Mutex<HashMap<u64, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Series sums scaled by the first-term magnitude `e^{ln_scale}`:
/// `f = e^{ln_scale} f_rel`, `x f' = e^{ln_scale} xfp_rel`,
/// `1 - F = e^{ln_scale} x sf_rel`. Errors are relative to the same scale.
#[derive(Debug, Clone, Copy)]
struct SeriesSums {
    ln_scale: f64,
    f_rel: f64,
    xfp_rel: f64,
    sf_rel: f64,
    err_f: f64,
    err_xfp: f64,
    err_sf: f64,
    converged: bool,
}

impl StableLaw {
    pub fn new(alpha: StabilityIndex) -> Self {
        let a = alpha.value();
        let beta = alpha.beta();
        let kappa = a / beta;
        let ln_phi0 = -kanter::ln_b(alpha, 0.0) / beta;
        let mut law = StableLaw {
            alpha,
            kappa,
            ln_phi0,
            x_star: f64::INFINITY,
        };
        let key = a.to_bits();
        let cached = threshold_cache()
            .lock()
            .expect("cache poisoned")
            .get(&key)
            .copied();
        law.x_star = match cached {
            Some(x) => x,
            None => {
                // Computed outside the lock; racing first uses compute the
                // same number.
                let x = law.find_series_threshold();
                threshold_cache()
                    .lock()
                    .expect("cache poisoned")
                    .entry(key)
                    .or_insert(x);
                x
            }
        };
        law
    }

    pub fn alpha(&self) -> StabilityIndex {
        self.alpha
    }

    /// Smallest x from which the series branch is used.
    pub fn series_threshold(&self) -> f64 {
        self.x_star
    }

    fn find_series_threshold(&self) -> f64 {
        // Scan upward in ln x; the series error relative to f decreases
        // monotonically once the terms start to shrink from n = 1.
        let mut ln_x = -2.0;
        while ln_x < 700.0 {
            let s = self.series_sums(ln_x);
            if s.converged
                && s.f_rel > 0.0
                && s.err_f <= SERIES_ACCEPT * s.f_rel
                && s.err_xfp <= SERIES_ACCEPT * s.f_rel
                && s.err_sf <= SERIES_ACCEPT * s.sf_rel.abs()
            {
                return ln_x.exp();
            }
            ln_x += 0.05;
        }
        f64::INFINITY
    }

    fn series_sums(&self, ln_x: f64) -> SeriesSums {
        let a = self.alpha.value();
        let ln_g1 = ln_gamma(1.0 + a);
        let ln_scale = ln_g1 - (a + 1.0) * ln_x - PI.ln();
        let (mut f, mut xfp, mut sf) = (0.0, 0.0, 0.0);
        let (mut err_f, mut err_xfp, mut err_sf) = (0.0, 0.0, 0.0);
        let mut prev = f64::INFINITY;
        let mut converged = false;
        let mut tail = 0.0;
        for n in 1..=SERIES_MAX_TERMS {
            let nf = n as f64;
            let an = a * nf;
            let ln_m = ln_gamma(1.0 + an) - ln_gamma(nf + 1.0) - ln_g1 - a * (nf - 1.0) * ln_x;
            let m = ln_m.exp();
            if !m.is_finite() {
                break;
            }
            let s = if n % 2 == 1 { 1.0 } else { -1.0 } * sin_pi(an);
            let t = s * m;
            f += t;
            xfp -= t * (an + 1.0);
            sf += t / an;
            // exp of a rounded logarithm: relative error grows with |ln m|.
            let e = m * (16.0 + ln_m.abs() + ln_gamma(nf + 1.0)) * f64::EPSILON;
            err_f += e;
            err_xfp += e * (an + 1.0);
            err_sf += e / an;
            if n > 2 && m < prev && m * (an + 1.0) <= 1e-17 * f.abs() {
                // Terms shrink faster than geometrically from here.
                tail = 2.0 * m * (an + a + 1.0);
                converged = true;
                break;
            }
            prev = m;
        }
        SeriesSums {
            ln_scale,
            f_rel: f,
            xfp_rel: xfp,
            sf_rel: sf,
            err_f: err_f + tail,
            err_xfp: err_xfp + tail,
            err_sf: err_sf + tail,
            converged,
        }
    }

    fn series_point(&self, x: f64, ln_x: f64) -> Result<DensityPoint> {
        let s = self.series_sums(ln_x);
        if !s.converged || s.f_rel <= 0.0 {
            let scale = s.ln_scale.exp();
            return Err(Error::Accuracy {
                estimate: scale * s.f_rel,
                abs_error: scale * s.err_f,
            });
        }
        let e = -s.xfp_rel / s.f_rel;
        let ln_f = s.ln_scale + s.f_rel.ln();
        let f = ln_f.exp();
        Ok(DensityPoint {
            x,
            ln_x,
            ln_f,
            f,
            elasticity: e,
            f_abs_error: f * s.err_f / s.f_rel,
            elasticity_error: (s.err_xfp + e.abs() * s.err_f) / s.f_rel,
            regime: Regime::Series,
            underflow: ln_f < -708.0,
        })
    }

    /// `d(u) = ln(φ(u)/φ(0))`, with `u` and `v = π - u` both supplied.
    #[inline]
    fn d(&self, u: f64, v: f64) -> f64 {
        -ln_b_ratio(self.alpha, u, v) / self.alpha.beta()
    }

    /// Integration setup in the variable `t`, where `t = u` when the
    /// integrand is concentrated near `u = 0` (large `w_0`) and `t = π - u`
    /// otherwise. Returns `(use_u, t_lo, t_hi, breakpoints)`.
    fn layout(&self, w0: f64) -> (bool, Vec<f64>) {
        let use_u = w0 >= 1.0;
        let uv = |t: f64| {
            if use_u {
                (t, (PI - t) + 1.224_646_799_147_353_2e-16)
            } else {
                ((PI - t) + 1.224_646_799_147_353_2e-16, t)
            }
        };
        // t at which d reaches `target`; d increases with u.
        let solve = |target: f64| -> f64 {
            let (mut lo, mut hi) = (0.0f64, PI);
            for _ in 0..48 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let (u, v) = uv(mid);
                let above = self.d(u, v) > target;
                // In the v-variable d decreases with t.
                if above == use_u {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let w_max = w0 + EXP_CUTOFF;
        let mut targets: Vec<f64> = [0.5, 4.0, 32.0, 256.0].iter().map(|e| w0 + e).collect();
        targets.extend([0.3, 1.0, 2.0, 5.0, 30.0]);
        targets.retain(|&w| w > w0 * (1.0 + 1e-9) && w < w_max);
        let mut pts = vec![0.0, PI];
        let cut = solve((w_max / w0).ln());
        if use_u {
            pts[1] = cut;
        } else {
            pts[0] = cut;
        }
        for w in targets {
            let t = solve((w / w0).ln());
            if t > pts[0] && t < pts[1] {
                pts.push(t);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        (use_u, pts)
    }

    /// Kanter integrals `e^{w_0} ∫ w^k e^{-w} du` for k = 0, 1, 2 and
    /// `∫ (1 - e^{-w}) du` when `with_sf`.
    fn kanter_integrals(&self, w0: f64, with_sf: bool) -> crate::quad::Integral<4> {
        let (use_u, pts) = self.layout(w0);
        let q = Quadrature {
            epsabs: 0.0,
            epsrel: TARGET_REL,
            max_intervals: 2000,
        };
        let integrand = |t: f64| -> [f64; 4] {
            let (u, v) = if use_u {
                (t, (PI - t) + 1.224_646_799_147_353_2e-16)
            } else {
                ((PI - t) + 1.224_646_799_147_353_2e-16, t)
            };
            let d = self.d(u, v);
            let excess = w0 * d.exp_m1();
            let w = w0 * d.exp();
            let e = (-excess).exp();
            let sf = if with_sf { -(-w).exp_m1() } else { 0.0 };
            [e, w * e, w * w * e, sf]
        };
        let mut r = q.integrate_vec(integrand, &pts);
        if with_sf && pts[1] < PI && use_u {
            // Beyond the cut 1 - e^{-w} = 1 to double precision.
            r.value[3] += PI - pts[pts.len() - 1];
        }
        if with_sf && !use_u && pts[0] > 0.0 {
            r.value[3] += pts[0];
        }
        r
    }

    fn integral_point(&self, x: f64, ln_x: f64) -> Result<DensityPoint> {
        let kappa = self.kappa;
        let ln_w0 = self.ln_phi0 - kappa * ln_x;
        let ln_pref = kappa.ln() - PI.ln() - ln_x;
        if ln_w0 > 690.0 {
            // w_0 itself is not representable; f is far below the smallest
            // subnormal. Laplace's method gives ln f and the elasticity.
            let w0 = ln_w0.exp();
            let a = self.alpha.value();
            let ln_f = ln_pref - w0 + ln_w0 + 0.5 * (PI / (2.0 * a)).ln() - 0.5 * ln_w0;
            return Ok(DensityPoint {
                x,
                ln_x,
                ln_f,
                f: 0.0,
                elasticity: 1.0 + kappa - kappa * w0,
                f_abs_error: 0.0,
                elasticity_error: f64::INFINITY,
                regime: Regime::Asymptotic,
                underflow: true,
            });
        }
        let w0 = ln_w0.exp();
        let r = self.kanter_integrals(w0, false);
        let [_, j1, j2, _] = r.value;
        if !r.converged && r.abs_error[1] > 1e-9 * j1 {
            return Err(Error::Accuracy {
                estimate: (ln_pref - w0 + j1.ln()).exp(),
                abs_error: (ln_pref - w0).exp() * r.abs_error[1],
            });
        }
        let ln_f = ln_pref - w0 + j1.ln();
        let f = ln_f.exp();
        let ratio = j2 / j1;
        let elasticity = 1.0 + kappa - kappa * ratio;
        let rel1 = r.abs_error[1] / j1;
        let rel2 = r.abs_error[2] / j2;
        Ok(DensityPoint {
            x,
            ln_x,
            ln_f,
            f,
            elasticity,
            f_abs_error: f * (rel1 + 4.0 * f64::EPSILON * (1.0 + ln_f.abs())),
            elasticity_error: kappa * ratio * (rel1 + rel2) + 4.0 * f64::EPSILON * elasticity.abs(),
            regime: Regime::Integral,
            underflow: ln_f < -708.0,
        })
    }

    /// Density, derivative and bookkeeping at `x > 0`.
    pub fn point(&self, x: f64) -> Result<DensityPoint> {
        check_positive(x)?;
        self.point_ln(x.ln())
    }

    /// As [`point`](Self::point), taking `ln x`; usable where `x` itself
    /// would overflow or underflow.
    pub fn point_ln(&self, ln_x: f64) -> Result<DensityPoint> {
        if ln_x.is_nan() {
            return Err(Error::Domain {
                what: "ln x",
                value: ln_x,
                domain: "(-inf, inf)",
            });
        }
        let x = ln_x.exp();
        if ln_x >= self.x_star.ln() {
            self.series_point(x, ln_x)
        } else {
            self.integral_point(x, ln_x)
        }
    }

    /// Forces the series or the integral representation.
    pub fn point_by(&self, x: f64, regime: Regime) -> Result<DensityPoint> {
        check_positive(x)?;
        match regime {
            Regime::Series => self.series_point(x, x.ln()),
            _ => self.integral_point(x, x.ln()),
        }
    }

    pub fn density(&self, x: f64) -> Result<EvalResult> {
        let p = self.point(x)?;
        Ok(EvalResult {
            value: p.f,
            abs_error_estimate: p.f_abs_error,
            regime: p.regime,
            underflow: p.underflow,
        })
    }

    pub fn density_prime(&self, x: f64) -> Result<EvalResult> {
        let p = self.point(x)?;
        Ok(EvalResult {
            value: p.f_prime(),
            abs_error_estimate: p.f_prime_abs_error(),
            regime: p.regime,
            underflow: p.underflow,
        })
    }

    /// `P(Z_α ≤ x)` and `P(Z_α > x)`, each accurate in relative terms.
    pub fn cdf_sf(&self, x: f64) -> Result<(f64, f64)> {
        check_positive(x)?;
        let ln_x = x.ln();
        if ln_x >= self.x_star.ln() {
            let s = self.series_sums(ln_x);
            let scale = (s.ln_scale + ln_x).exp();
            if !s.converged {
                return Err(Error::Accuracy {
                    estimate: scale * s.sf_rel,
                    abs_error: scale * s.err_sf,
                });
            }
            let sf = scale * s.sf_rel;
            return Ok((1.0 - sf, sf));
        }
        let ln_w0 = self.ln_phi0 - self.kappa * ln_x;
        if ln_w0 > 690.0 {
            return Ok((0.0, 1.0));
        }
        let w0 = ln_w0.exp();
        let r = self.kanter_integrals(w0, true);
        let cdf = (-w0).exp() * r.value[0] / PI;
        let sf = r.value[3] / PI;
        Ok((cdf, sf))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_sf(x)?.0)
    }

    pub fn sf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_sf(x)?.1)
    }

    /// `ln f_α^r(x)` for the density of `Z_α^r`.
    pub fn ln_power_density(&self, r: PowerExponent, x: f64) -> Result<f64> {
        check_positive(x)?;
        let r = r.value();
        let ln_x = x.ln();
        let p = if r == 1.0 {
            self.point(x)?
        } else {
            self.point_ln(ln_x / r)?
        };
        Ok(-r.abs().ln() + (1.0 / r - 1.0) * ln_x + p.ln_f)
    }

    /// `f_α^r(x) = (1/|r|) x^{1/r - 1} f_α(x^{1/r})`.
    pub fn power_density(&self, r: PowerExponent, x: f64) -> Result<f64> {
        if r.value() == 1.0 {
            return Ok(self.point(x)?.f);
        }
        Ok(self.ln_power_density(r, x)?.exp())
    }

    /// `h_α^r(x) = (1 - r) f(x) + x f'(x)`.
    pub fn h(&self, r: f64, x: f64) -> Result<f64> {
        let p = self.point(x)?;
        Ok(p.f * ((1.0 - r) - p.elasticity))
    }

    /// `g_α^r(x) = h_α^{-r}(x) / r`, defined for `r > 0`.
    pub fn g(&self, r: f64, x: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain {
                what: "r",
                value: r,
                domain: "(0, inf)",
            });
        }
        Ok(self.h(-r, x)? / r)
    }

    /// `E[Z_α^s]` by quadrature, for `s < α`.
    pub fn mellin(&self, s: f64) -> Result<f64> {
        let a = self.alpha.value();
        if s.is_nan() || s >= a {
            return Err(Error::Divergence { s, alpha: a });
        }
        let q = Quadrature::with_rel(1e-12);
        // [0, 1] in t = -ln x.
        let t_hi = self.left_cutoff(s + 1.0);
        let mut pts: Vec<f64> = (0..=8).map(|i| t_hi * i as f64 / 8.0).collect();
        pts.dedup();
        let failed = std::cell::Cell::new(None);
        let left = q.integrate_pts(
            |t| match self.point_ln(-t) {
                Ok(p) => (-(s + 1.0) * t + p.ln_f).exp(),
                Err(e) => {
                    failed.set(Some(e));
                    f64::NAN
                }
            },
            &pts,
        );
        // [1, ∞) in v = x^{-(α - s)}.
        let k = a - s;
        let right = q.integrate_pts(
            |v| {
                let ln_x = -v.ln() / k;
                match self.point_ln(ln_x) {
                    Ok(p) => ((s + 1.0) * ln_x + p.ln_f - v.ln()).exp() / k,
                    Err(e) => {
                        failed.set(Some(e));
                        f64::NAN
                    }
                }
            },
            &[0.0, 1e-6, 1e-3, 0.1, 0.5, 1.0],
        );
        if let Some(e) = failed.take() {
            return Err(e);
        }
        let value = left.value[0] + right.value[0];
        let err = left.abs_error[0] + right.abs_error[0];
        if !(left.converged && right.converged) && err > 1e-9 * value.abs() {
            return Err(Error::Accuracy {
                estimate: value,
                abs_error: err,
            });
        }
        Ok(value)
    }

    /// `t = -ln x` beyond which `x^{c-1} f(x)`, written as `e^{-ct} f(e^{-t})`,
    /// is negligible.
    fn left_cutoff(&self, c: f64) -> f64 {
        // ln f(e^{-t}) ≈ -φ_0 e^{κt}; need φ_0 e^{κt} > 800 + max(0, -c t).
        let mut t: f64 = 1.0;
        for _ in 0..20 {
            let need = 800.0 + (-c * t).max(0.0);
            t = ((need.ln() - self.ln_phi0) / self.kappa).max(0.5);
        }
        t
    }

    /// `∫_0^∞ e^{-λx} w(p) dx` where `w` maps the density point at `x` to
    /// the integrand (for instance `|p| p.f`).
    pub fn laplace_with<W>(&self, lambda: f64, weight: W) -> Result<f64>
    where
        W: Fn(&DensityPoint) -> f64,
    {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain {
                what: "lambda",
                value: lambda,
                domain: "(0, inf)",
            });
        }
        let q = Quadrature::with_rel(1e-12);
        let failed = std::cell::Cell::new(None);
        let eval = |ln_x: f64| match self.point_ln(ln_x) {
            Ok(p) => (-lambda * p.x).exp() * weight(&p) * p.x,
            Err(e) => {
                failed.set(Some(e));
                f64::NAN
            }
        };
        // The whole line in t = ln x: left tail dies through f, right tail
        // through e^{-λx}.
        let t_lo = -self.left_cutoff(1.0);
        let t_hi = (800.0 / lambda).ln().max(1.0);
        let n = 16;
        let pts: Vec<f64> = (0..=n)
            .map(|i| t_lo + (t_hi - t_lo) * i as f64 / n as f64)
            .collect();
        let r = q.integrate_pts(eval, &pts);
        if let Some(e) = failed.take() {
            return Err(e);
        }
        if !r.converged && r.abs_error[0] > 1e-9 * r.value[0].abs() {
            return Err(Error::Accuracy {
                estimate: r.value[0],
                abs_error: r.abs_error[0],
            });
        }
        Ok(r.value[0])
    }

    /// `E[e^{-λZ}]` by quadrature of the density.
    pub fn laplace(&self, lambda: f64) -> Result<f64> {
        self.laplace_with(lambda, |p| p.f)
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return Err(Error::Domain {
            what: "x",
            value: x,
            domain: "(0, inf)",
        });
    }
    Ok(())
}

/// Series coefficient `a_n` of `f_α(x) = Σ a_n x^{-αn-1}`.
pub fn series_coefficient(alpha: StabilityIndex, n: u32) -> f64 {
    let a = alpha.value();
    let nf = n as f64;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    sign * (ln_gamma(1.0 + a * nf) - ln_gamma(nf + 1.0)).exp() * sin_pi(a * nf) / PI
}

pub fn stable_density(alpha: StabilityIndex, x: f64) -> Result<EvalResult> {
    StableLaw::new(alpha).density(x)
}

pub fn stable_density_prime(alpha: StabilityIndex, x: f64) -> Result<EvalResult> {
    StableLaw::new(alpha).density_prime(x)
}

pub fn power_density(alpha: StabilityIndex, r: PowerExponent, x: f64) -> Result<f64> {
    StableLaw::new(alpha).power_density(r, x)
}

pub fn h_function(alpha: StabilityIndex, r: f64, x: f64) -> Result<f64> {
    StableLaw::new(alpha).h(r, x)
}

pub fn g_function(alpha: StabilityIndex, r: f64, x: f64) -> Result<f64> {
    StableLaw::new(alpha).g(r, x)
}

pub fn mellin(alpha: StabilityIndex, s: f64) -> Result<f64> {
    StableLaw::new(alpha).mellin(s)
}

/// Closed form `E[Z_α^s] = Γ(1 - s/α) / Γ(1 - s)` for `s < α`.
pub fn mellin_exact(alpha: StabilityIndex, s: f64) -> Result<f64> {
    let a = alpha.value();
    if s >= a {
        return Err(Error::Divergence { s, alpha: a });
    }
    Ok(crate::specfun::gamma(1.0 - s / a) * rgamma(1.0 - s))
}
