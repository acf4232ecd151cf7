//! Exact derivatives of `G_{α,t}(λ) = (λ^α + t) e^{-λ^α}` for rational α and
//! t, finite-order complete-monotonicity checks and the log-convexity
//! threshold.
//!
//! Every derivative of `G` is a finite sum `Σ c_{j,k} λ^{αj-k} e^{-λ^α}`.
//! After `n` derivatives all terms have `k = n`, so with `μ = λ^{-α}`
//!
//! ```text
//! (-1)^n G^{(n)}(λ) = e^{-λ^α} λ^{α j_max - n} Q_n(μ),
//! Q_n(μ) = Σ_j (-1)^n c_{j,n} μ^{j_max - j},
//! ```
//!
//! and the sign of `(-1)^n G^{(n)}` on `λ > 0` is the sign of `Q_n` on `μ > 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::quad::Quadrature;
use crate::specfun::{gamma, StabilityIndex};

/// Parses `p/q` or an integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidRational(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `Σ c_{j,k} λ^{αj-k} e^{-λ^α}` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpPolySum {
    pub alpha: BigRational,
    pub t: BigRational,
    pub terms: BTreeMap<(u32, u32), BigRational>,
}

impl ExpPolySum {
    /// `G_{α,t}` itself. α must lie in `(0, 1]`.
    pub fn g(alpha: BigRational, t: BigRational) -> Result<Self> {
        if !alpha.is_positive() || alpha > BigRational::one() {
            return Err(Error::InvalidRational(format!(
                "alpha = {alpha} must lie in (0, 1]"
            )));
        }
        let mut terms = BTreeMap::new();
        terms.insert((1, 0), BigRational::one());
        if !t.is_zero() {
            terms.insert((0, 0), t.clone());
        }
        Ok(ExpPolySum { alpha, t, terms })
    }

    /// First derivative: `(j,k) ↦ (αj-k)·(j,k+1) - α·(j+1,k+1)`.
    pub fn differentiate(&self) -> Self {
        let mut out: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
        for (&(j, k), c) in &self.terms {
            let power = &self.alpha * BigRational::from_integer(j.into())
                - BigRational::from_integer(k.into());
            let mut add = |key, v: BigRational| {
                if v.is_zero() {
                    return;
                }
                let e = out.entry(key).or_insert_with(BigRational::zero);
                *e += v;
            };
            add((j, k + 1), c * power);
            add((j + 1, k + 1), -(c * &self.alpha));
        }
        out.retain(|_, v| !v.is_zero());
        ExpPolySum {
            alpha: self.alpha.clone(),
            t: self.t.clone(),
            terms: out,
        }
    }

    /// The `n`-th derivative.
    pub fn derivative(&self, n: u32) -> Self {
        let mut d = self.clone();
        for _ in 0..n {
            d = d.differentiate();
        }
        d
    }

    /// Floating-point value at `λ > 0`.
    pub fn eval(&self, lambda: f64) -> f64 {
        let a = self.alpha.to_f64().unwrap_or(f64::NAN);
        let la = lambda.ln();
        let e = (-lambda.powf(a)).exp();
        self.terms
            .iter()
            .map(|(&(j, k), c)| {
                c.to_f64().unwrap_or(f64::NAN) * ((a * j as f64 - k as f64) * la).exp()
            })
            .sum::<f64>()
            * e
    }

    /// `Q(μ)` in ascending powers and the power `α j_max - n` of the λ
    /// prefactor, for a sum whose terms all have `k = n`, including the
    /// sign `(-1)^n`.
    fn to_mu_polynomial(&self, n: u32) -> (Poly, BigRational) {
        let jmax = self.terms.keys().map(|&(j, _)| j).max().unwrap_or(0);
        let mut coeffs = vec![BigRational::zero(); jmax as usize + 1];
        let sign = if n % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        for (&(j, k), c) in &self.terms {
            debug_assert_eq!(k, n);
            coeffs[(jmax - j) as usize] += c * &sign;
        }
        let power = &self.alpha * BigRational::from_integer(jmax.into())
            - BigRational::from_integer(n.into());
        (Poly::new(coeffs), power)
    }
}

/// Dense polynomial with rational coefficients, ascending powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<BigRational>);

impl Poly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer((i as i64).into()))
                .collect(),
        )
    }

    /// Remainder of Euclidean division by a nonzero `d`.
    pub fn rem(&self, d: &Poly) -> Poly {
        let mut r = self.0.clone();
        let dl = d.0.last().expect("division by zero polynomial");
        while r.len() >= d.0.len() && !r.is_empty() {
            let shift = r.len() - d.0.len();
            let q = r.last().unwrap() / dl;
            for (i, c) in d.0.iter().enumerate() {
                r[shift + i] -= &q * c;
            }
            r.pop();
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    /// Exact quotient by a nonzero `d` (the remainder is discarded).
    pub fn div(&self, d: &Poly) -> Poly {
        if self.0.len() < d.0.len() {
            return Poly(vec![]);
        }
        let mut r = self.0.clone();
        let mut q = vec![BigRational::zero(); r.len() - d.0.len() + 1];
        let dl = d.0.last().expect("division by zero polynomial");
        while r.len() >= d.0.len() && !r.is_empty() {
            let shift = r.len() - d.0.len();
            let c = r.last().unwrap() / dl;
            for (i, dc) in d.0.iter().enumerate() {
                r[shift + i] -= &c * dc;
            }
            q[shift] = c;
            r.pop();
        }
        Poly::new(q)
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    fn monic(self) -> Poly {
        match self.0.last() {
            Some(l) => {
                let l = l.clone();
                Poly(self.0.into_iter().map(|c| c / &l).collect())
            }
            None => self,
        }
    }

    /// Divides by the largest power of μ dividing the polynomial.
    pub fn strip_low_zeros(&self) -> Poly {
        let first = self.0.iter().position(|c| !c.is_zero()).unwrap_or(0);
        Poly(self.0[first..].to_vec())
    }

    /// Positive content `c` and primitive integer polynomial `P` with
    /// `self = c·P`.
    pub fn primitive(&self) -> (BigRational, Vec<BigInt>) {
        if self.is_zero() {
            return (BigRational::one(), vec![]);
        }
        let lcm = self.0.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        let content = BigRational::new(g.clone(), lcm);
        (content, ints.into_iter().map(|c| c / &g).collect())
    }

    /// Sign variations of the coefficient sequence.
    pub fn sign_variations(&self) -> usize {
        let signs: Vec<bool> = self
            .0
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| c.is_positive())
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    fn sturm_chain(&self) -> Vec<Poly> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(Poly(r.0.into_iter().map(|c| -c).collect()));
        }
        chain
    }

    /// `1 + max |a_i / a_n|`: every real root is smaller in modulus.
    pub fn cauchy_bound(&self) -> BigRational {
        let lead = self.0.last().expect("zero polynomial").abs();
        let m = self.0[..self.0.len() - 1]
            .iter()
            .map(|c| c.abs() / &lead)
            .max()
            .unwrap_or_else(BigRational::zero);
        m + BigRational::one()
    }
}

fn variations_at(chain: &[Poly], x: &BigRational) -> usize {
    let signs: Vec<bool> = chain
        .iter()
        .map(|p| p.eval(x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Distinct roots in `(a, b]` of the polynomial that starts `chain`.
fn roots_in(chain: &[Poly], a: &BigRational, b: &BigRational) -> usize {
    variations_at(chain, a) - variations_at(chain, b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignDecision {
    /// `Q ≥ 0` on `μ > 0`; `method` names the step that decided it.
    NonNegative {
        method: &'static str,
    },
    Negative {
        mu: String,
        value: String,
    },
    Inconclusive {
        hint: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub order: u32,
    /// `(-1)^n G^{(n)} = e^{-λ^α} λ^{power} Q_n(λ^{-α})`.
    pub power: String,
    /// Coefficients of `Q_n`, ascending in μ, as `p/q` strings.
    pub coefficients: Vec<String>,
    /// Positive content divided out of `Q_n`.
    pub content: String,
    /// `Q_n / content`, ascending, integer coefficients.
    pub normalized: Vec<String>,
    pub decision: SignDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmReport {
    pub alpha: String,
    pub t: String,
    pub max_order: u32,
    pub orders: Vec<OrderReport>,
    pub first_failing_order: Option<u32>,
    /// The negative witness as `(μ, λ = μ^{-1/α})`.
    pub witness_mu: Option<String>,
    pub witness_lambda: Option<f64>,
    pub inconclusive_order: Option<u32>,
}

impl CmReport {
    pub fn passed(&self) -> bool {
        self.first_failing_order.is_none() && self.inconclusive_order.is_none()
    }
}

fn to_strings(c: &[BigRational]) -> Vec<String> {
    c.iter().map(|x| x.to_string()).collect()
}

/// `Q_n` for `G_{α,t}` in ascending powers of μ, with the λ power.
pub fn q_polynomial(alpha: &BigRational, t: &BigRational, n: u32) -> Result<(Poly, BigRational)> {
    let g = ExpPolySum::g(alpha.clone(), t.clone())?;
    Ok(g.derivative(n).to_mu_polynomial(n))
}

const GRID_DENOM: i64 = 20;
const GRID_POINTS: i64 = 400;
const MAX_BISECTIONS: usize = 256;

/// Sign of `q` on `μ > 0`, exactly.
///
/// 1. No sign variation in the coefficients: the sign is that of the leading
///    coefficient (Descartes).
/// 2. The rational grid `k/20`, `k = 1..400`; the most negative value is the
///    witness.
/// 3. Otherwise the roots of the square-free part are isolated with a Sturm
///    chain on `(0, B]`, `B` the Cauchy bound, and `q` is evaluated on both
///    sides of every root.
pub fn decide_sign(q: &Poly) -> SignDecision {
    if q.is_zero() {
        return SignDecision::NonNegative {
            method: "zero polynomial",
        };
    }
    let q = q.strip_low_zeros();
    if q.sign_variations() == 0 {
        return if q.0.last().unwrap().is_positive() {
            SignDecision::NonNegative {
                method: "descartes",
            }
        } else {
            negative(&q, BigRational::one())
        };
    }
    let mut worst: Option<(BigRational, BigRational)> = None;
    for k in 1..=GRID_POINTS {
        let mu = rat(k, GRID_DENOM);
        let v = q.eval(&mu);
        if v.is_negative() && worst.as_ref().is_none_or(|(_, w)| v < *w) {
            worst = Some((mu, v));
        }
    }
    if let Some((mu, v)) = worst {
        return SignDecision::Negative {
            mu: mu.to_string(),
            value: v.to_string(),
        };
    }
    if q.degree() == 0 {
        return SignDecision::NonNegative { method: "grid" };
    }
    let sq = q.div(&q.gcd(&q.derivative()));
    let chain = sq.sturm_chain();
    let zero = BigRational::zero();
    let bound = sq.cauchy_bound();
    // Isolating intervals whose endpoints are not roots.
    let mut stack = vec![(zero.clone(), bound.clone(), 0usize)];
    let mut samples = vec![zero, bound];
    while let Some((a, b, depth)) = stack.pop() {
        let n = roots_in(&chain, &a, &b);
        if n == 0 {
            continue;
        }
        if n == 1 {
            samples.push(a);
            samples.push(b);
            continue;
        }
        if depth >= MAX_BISECTIONS {
            return SignDecision::Inconclusive {
                hint: format!(
                    "roots closer than {} near mu = {}; increase the bisection depth",
                    (&b - &a),
                    a
                ),
            };
        }
        let mut m = (&a + &b) / rat(2, 1);
        while sq.eval(&m).is_zero() {
            m = (&m + &b) / rat(2, 1);
        }
        stack.push((a, m.clone(), depth + 1));
        stack.push((m, b, depth + 1));
    }
    for mu in samples {
        let v = q.eval(&mu);
        if v.is_negative() {
            if mu.is_zero() {
                // Q(0) < 0: walk towards 0 until a positive μ shows it.
                let mut m = rat(1, GRID_DENOM);
                while !q.eval(&m).is_negative() {
                    m /= rat(2, 1);
                }
                return negative(&q, m);
            }
            return negative(&q, mu);
        }
    }
    SignDecision::NonNegative { method: "sturm" }
}

fn negative(q: &Poly, mu: BigRational) -> SignDecision {
    let v = q.eval(&mu);
    SignDecision::Negative {
        mu: mu.to_string(),
        value: v.to_string(),
    }
}

/// Checks `(-1)^n G_{α,t}^{(n)} ≥ 0` on `λ > 0` for `n = 1..=max_order`,
/// stopping at the first order with a negative witness or an undecided sign.
pub fn cm_check(alpha: &BigRational, t: &BigRational, max_order: u32) -> Result<CmReport> {
    if max_order < 1 {
        return Err(Error::Precondition("max_order must be at least 1".into()));
    }
    let g = ExpPolySum::g(alpha.clone(), t.clone())?;
    let mut report = CmReport {
        alpha: alpha.to_string(),
        t: t.to_string(),
        max_order,
        orders: vec![],
        first_failing_order: None,
        witness_mu: None,
        witness_lambda: None,
        inconclusive_order: None,
    };
    let mut d = g;
    for n in 1..=max_order {
        d = d.differentiate();
        let (q, power) = d.to_mu_polynomial(n);
        let (content, prim) = q.primitive();
        let decision = decide_sign(&q);
        match &decision {
            SignDecision::Negative { mu, .. } => {
                report.first_failing_order = Some(n);
                let m = parse_rational(mu)?.to_f64().unwrap_or(f64::NAN);
                report.witness_lambda = Some(m.powf(-1.0 / alpha.to_f64().unwrap_or(f64::NAN)));
                report.witness_mu = Some(mu.clone());
            }
            SignDecision::Inconclusive { .. } => report.inconclusive_order = Some(n),
            SignDecision::NonNegative { .. } => {}
        }
        let stop = !matches!(decision, SignDecision::NonNegative { .. });
        report.orders.push(OrderReport {
            order: n,
            power: power.to_string(),
            coefficients: to_strings(&q.0),
            content: content.to_string(),
            normalized: prim.iter().map(|c| c.to_string()).collect(),
            decision,
        });
        if stop {
            break;
        }
    }
    Ok(report)
}

/// Which condition fixes the log-convexity threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdCriterion {
    /// `t² - t ≥ 0`, i.e. `t ≥ 1`.
    ConstantTerm,
    /// Vertex of the quadratic at `x ≤ 0`: `t ≥ 1/(2(1-α))`.
    Vertex,
    /// Non-positive discriminant: `t ≥ 1/(4α(1-α))`.
    Discriminant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogConvexityThreshold {
    #[serde(serialize_with = "ser_rational")]
    pub t_threshold: BigRational,
    pub criterion: ThresholdCriterion,
}

fn ser_rational<S: serde::Serializer>(
    r: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Smallest `t` with `x² + (2t - 1/(1-α))x + t² - t ≥ 0` for all `x ≥ 0`,
/// the condition for `G_{α,t}` to be log-convex.
pub fn log_convexity_threshold(alpha: &BigRational) -> Result<LogConvexityThreshold> {
    let one = BigRational::one();
    if !alpha.is_positive() || *alpha >= one {
        return Err(Error::InvalidRational(format!(
            "alpha = {alpha} must lie in (0, 1)"
        )));
    }
    let beta = &one - alpha;
    let vertex = &one / (rat(2, 1) * &beta);
    let disc = &one / (rat(4, 1) * alpha * &beta);
    let (t, criterion) = if disc < vertex {
        (disc, ThresholdCriterion::Discriminant)
    } else {
        (vertex, ThresholdCriterion::Vertex)
    };
    Ok(if t < one {
        LogConvexityThreshold {
            t_threshold: one,
            criterion: ThresholdCriterion::ConstantTerm,
        }
    } else {
        LogConvexityThreshold {
            t_threshold: t,
            criterion,
        }
    })
}

/// Whether `x ↦ (αx^α + r) e^{-x^α} / ((1+r) Γ(1+1/α))` is log-convex on
/// `(0, ∞)`. The unit mass is confirmed by quadrature.
pub fn log_convex_density_check(alpha: &BigRational, r: &BigRational) -> Result<bool> {
    let af = alpha.to_f64().unwrap_or(f64::NAN);
    StabilityIndex::new(af)?;
    if !r.is_positive() {
        return Err(Error::InvalidRational(format!("r = {r} must be positive")));
    }
    let mass = unit_mass(af, r.to_f64().unwrap_or(f64::NAN))?;
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::Accuracy {
            estimate: mass,
            abs_error: (mass - 1.0).abs(),
        });
    }
    let th = log_convexity_threshold(alpha)?;
    Ok(r / alpha >= th.t_threshold)
}

/// `∫_0^∞ (αx^α + r) e^{-x^α} dx / ((1+r) Γ(1+1/α))`, in the variable `u = x^α`.
fn unit_mass(a: f64, r: f64) -> Result<f64> {
    let norm = (1.0 + r) * gamma(1.0 + 1.0 / a);
    let e = 1.0 / a - 1.0;
    let f = |u: f64| (a * u + r) * (-u).exp() * u.powf(e) / a;
    let i = Quadrature::default()
        .integrate_pts(f, &[0.0, 1.0, 10.0, 100.0, 745.0])
        .into_result()?;
    Ok(i.scalar() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational(" 2 ").unwrap(), rat(2, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn poly_division() {
        // (μ-1)²(μ+2) has square-free part (μ-1)(μ+2)
        let p = Poly::new(vec![rat(2, 1), rat(-3, 1), rat(0, 1), rat(1, 1)]);
        let sq = p.div(&p.gcd(&p.derivative()));
        assert_eq!(
            sq.monic(),
            Poly::new(vec![rat(-2, 1), rat(1, 1), rat(1, 1)])
        );
        assert!(p.rem(&Poly::new(vec![rat(-1, 1), rat(1, 1)])).is_zero());
    }

    #[test]
    fn double_root_is_nonnegative() {
        // (μ - 7/3)² is never negative and the grid misses its root.
        let p = Poly::new(vec![rat(49, 9), rat(-14, 3), rat(1, 1)]);
        assert_eq!(
            decide_sign(&p),
            SignDecision::NonNegative { method: "sturm" }
        );
    }

    #[test]
    fn narrow_dip_between_grid_points() {
        // (μ - 141/100)(μ - 142/100) < 0 only on (1.41, 1.42), between grid nodes 1.40 and 1.45.
        let a = rat(141, 100);
        let b = rat(142, 100);
        let p = Poly::new(vec![&a * &b, -(&a + &b), rat(1, 1)]);
        match decide_sign(&p) {
            SignDecision::Negative { mu, .. } => {
                let m = parse_rational(&mu).unwrap();
                assert!(m > a && m < b);
            }
            d => panic!("{d:?}"),
        }
    }
}
