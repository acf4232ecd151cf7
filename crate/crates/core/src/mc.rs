//! Samplers for `Z_α`, `M_α = Z_α L^{1/α}` and `X_{α,r}`, and statistical
//! checks of the distributional identities they satisfy.
//!
//! Every batch is cut into chunks of [`CHUNK`] draws. Chunk `c` gets its own
//! ChaCha8 stream keyed by the seed, the sampler and its parameters, so a
//! batch does not depend on how chunks are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Open01};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::f64::consts::PI;

use crate::density::{mellin_exact, series_coefficient, StableLaw};
use crate::error::{Error, Result};
use crate::frontier::compute_r_with;
use crate::kanter::{exponent_candidates, kanter_exponent, ln_b, KANTER_EXPONENT_LABEL};
use crate::par::{self, Exec};
use crate::quad::Quadrature;
use crate::specfun::{ln_gamma, mittag_leffler, StabilityIndex};

pub const CHUNK: usize = 4096;
/// Significance level of every statistical gate.
pub const LEVEL: f64 = 1e-3;
/// Gate on `|estimate - target| / std_error` for Monte Carlo means.
pub const Z_GATE: f64 = 4.0;
const TABLE_KNOTS: usize = 1 << 12;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Identifies a sampler and its parameters; distinct keys give independent
/// streams for the same seed.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Stream {
    Z,
    M,
    X,
    ExpFactor,
}

fn stream_key(seed: u64, stream: Stream, alpha: f64, r: f64) -> u64 {
    let mut k = splitmix64(seed);
    for v in [stream as u64 + 1, alpha.to_bits(), r.to_bits()] {
        k = splitmix64(k ^ v);
    }
    k
}

fn generate<F>(exec: Exec, key: u64, n: usize, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    par::map_indexed(exec, chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(c as u64);
        let len = CHUNK.min(n - c * CHUNK);
        (0..len).map(|_| draw(&mut rng)).collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub seed: u64,
    pub n: usize,
    pub descriptor: String,
    #[serde(skip)]
    pub values: Vec<f64>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("sample size must be at least 1".into()));
    }
    Ok(())
}

/// `L^{(α-1)/α} b_α(U)^e` with `L ~ Exp(1)`, `U ~ Unif(0, π)`.
fn kanter_draw(alpha: StabilityIndex, exponent: f64, rng: &mut ChaCha8Rng) -> f64 {
    let a = alpha.value();
    let l: f64 = rng.sample(Exp1);
    let u: f64 = PI * rng.sample::<f64, _>(Open01);
    ((a - 1.0) / a * l.ln() + exponent * ln_b(alpha, u)).exp()
}

fn sample_z_with(
    alpha: StabilityIndex,
    exponent: f64,
    seed: u64,
    n: usize,
    exec: Exec,
) -> Vec<f64> {
    let key = stream_key(seed, Stream::Z, alpha.value(), exponent);
    generate(exec, key, n, |rng| kanter_draw(alpha, exponent, rng))
}

pub fn sample_z(alpha: StabilityIndex, seed: u64, n: usize, exec: Exec) -> Result<SampleBatch> {
    check_n(n)?;
    Ok(SampleBatch {
        seed,
        n,
        descriptor: format!(
            "Z alpha={} kanter exponent {KANTER_EXPONENT_LABEL}",
            alpha.value()
        ),
        values: sample_z_with(alpha, kanter_exponent(alpha), seed, n, exec),
    })
}

/// `M_α = Z_α L^{1/α}` with an independent `L ~ Exp(1)`.
pub fn sample_m(alpha: StabilityIndex, seed: u64, n: usize, exec: Exec) -> Result<SampleBatch> {
    check_n(n)?;
    let a = alpha.value();
    let e = kanter_exponent(alpha);
    let key = stream_key(seed, Stream::M, a, 0.0);
    let values = generate(exec, key, n, |rng| {
        let z = kanter_draw(alpha, e, rng);
        let l: f64 = rng.sample(Exp1);
        z * l.powf(1.0 / a)
    });
    Ok(SampleBatch {
        seed,
        n,
        descriptor: format!("M alpha={a}"),
        values,
    })
}

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes) on strictly
/// increasing abscissae.
#[derive(Debug, Clone)]
struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ms: Vec<f64>,
}

impl MonotoneCubic {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let d: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut ms = vec![0.0; n];
        ms[0] = d[0];
        ms[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            ms[i] = if d[i - 1] * d[i] <= 0.0 {
                0.0
            } else {
                0.5 * (d[i - 1] + d[i])
            };
        }
        for i in 0..n - 1 {
            if d[i] == 0.0 {
                ms[i] = 0.0;
                ms[i + 1] = 0.0;
                continue;
            }
            let a = ms[i] / d[i];
            let b = ms[i + 1] / d[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                ms[i] = t * a * d[i];
                ms[i + 1] = t * b * d[i];
            }
        }
        MonotoneCubic { xs, ys, ms }
    }

    fn eval(&self, x: f64) -> f64 {
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            k => (k - 1).min(self.xs.len() - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * h * self.ms[i]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[i + 1]
            + (t3 - t2) * h * self.ms[i + 1]
    }
}

/// Inverse-CDF sampler for `X_{α,r}`, whose density is
/// `g(x) = f(x)(1 + r - E(x))/r` and whose distribution function is
/// `G(x) = F(x) + x f(x)/r`.
#[derive(Debug, Clone)]
pub struct XSampler {
    law: StableLaw,
    r: f64,
    ln_lo: f64,
    ln_hi: f64,
    g_lo: f64,
    s_hi: f64,
    /// ln x as a function of ln G on the lower half.
    lower: MonotoneCubic,
    /// ln x as a function of -ln(1 - G) on the upper half.
    upper: MonotoneCubic,
    /// `∫ g` over the table plus both tails.
    pub mass: f64,
    /// Smallest `g/f = (1 + r - E)/r` on the knots.
    pub min_g_over_f: f64,
}

impl XSampler {
    /// Builds the table. Requires `r ≥ R(α)`: below the frontier `g` takes
    /// negative values and is not a density.
    pub fn new(alpha: StabilityIndex, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Precondition(format!(
                "X_(alpha,r) needs r > 0, got r = {r}"
            )));
        }
        let big_r = compute_r_with(alpha, 1e-6, Exec::Sequential)?.value;
        if r < big_r {
            return Err(Error::Precondition(format!(
                "g is a density only for r >= R(alpha); r = {r} < R({}) = {big_r:.6}",
                alpha.value()
            )));
        }
        let law = StableLaw::new(alpha);
        let s = XSampler::empty(law, r);
        let tiny = 1e-14;
        let mut ln_lo = 0.0;
        while s.g_of(ln_lo)? > tiny {
            ln_lo -= 0.5;
        }
        let mut ln_hi = 0.0;
        while s.s_of(ln_hi)? > tiny {
            ln_hi += 1.0;
        }
        let knots: Vec<f64> = (0..TABLE_KNOTS)
            .map(|i| ln_lo + (ln_hi - ln_lo) * i as f64 / (TABLE_KNOTS - 1) as f64)
            .collect();
        let rows: Result<Vec<(f64, f64, f64)>> = knots
            .iter()
            .map(|&t| {
                let p = s.law.point_ln(t)?;
                Ok((s.g_of(t)?, s.s_of(t)?, (1.0 + r - p.elasticity) / r))
            })
            .collect();
        let rows = rows?;
        let min_g_over_f = rows.iter().map(|v| v.2).fold(f64::INFINITY, f64::min);
        if min_g_over_f < -1e-9 {
            return Err(Error::Precondition(format!(
                "g takes negative values (g/f = {min_g_over_f:e}) for alpha = {}, r = {r}",
                alpha.value()
            )));
        }
        let worst_sum = rows
            .iter()
            .map(|v| (v.0 + v.1 - 1.0).abs())
            .fold(0.0, f64::max);
        if worst_sum > 1e-9 {
            return Err(Error::Accuracy {
                estimate: 1.0 + worst_sum,
                abs_error: worst_sum,
            });
        }
        let (mut lx, mut ly) = (vec![], vec![]);
        let (mut ux, mut uy) = (vec![], vec![]);
        for (i, &(g, sv, _)) in rows.iter().enumerate() {
            if g > 0.0 && g <= 0.6 && lx.last().is_none_or(|&p: &f64| g.ln() > p) {
                lx.push(g.ln());
                ly.push(knots[i]);
            }
            if sv > 0.0 && sv <= 0.6 && ux.last().is_none_or(|&p: &f64| -sv.ln() > p) {
                ux.push(-sv.ln());
                uy.push(knots[i]);
            }
        }
        if lx.len() < 4 || ux.len() < 4 {
            return Err(Error::Precondition(
                "inverse-CDF table is degenerate".into(),
            ));
        }
        let mass = s.g_of(ln_lo)? + s.s_of(ln_hi)? + s.table_mass(ln_lo, ln_hi)?;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::Accuracy {
                estimate: mass,
                abs_error: (mass - 1.0).abs(),
            });
        }
        Ok(XSampler {
            ln_lo,
            ln_hi,
            g_lo: s.g_of(ln_lo)?,
            s_hi: s.s_of(ln_hi)?,
            lower: MonotoneCubic::new(lx, ly),
            upper: MonotoneCubic::new(ux, uy),
            mass,
            min_g_over_f,
            ..s
        })
    }

    fn empty(law: StableLaw, r: f64) -> Self {
        let dummy = MonotoneCubic {
            xs: vec![0.0, 1.0],
            ys: vec![0.0, 1.0],
            ms: vec![1.0, 1.0],
        };
        XSampler {
            law,
            r,
            ln_lo: 0.0,
            ln_hi: 0.0,
            g_lo: 0.0,
            s_hi: 0.0,
            lower: dummy.clone(),
            upper: dummy,
            mass: f64::NAN,
            min_g_over_f: f64::NAN,
        }
    }

    pub fn alpha(&self) -> StabilityIndex {
        self.law.alpha()
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `G(x)`.
    fn g_of(&self, ln_x: f64) -> Result<f64> {
        let x = ln_x.exp();
        let (cdf, _) = self.law.cdf_sf(x)?;
        let f = self.law.point_ln(ln_x)?.f;
        Ok(cdf + x * f / self.r)
    }

    /// `1 - G(x) = P(X > x)`; in the series range term by term, since the
    /// leading terms of the two pieces cancel when `r = α`.
    fn s_of(&self, ln_x: f64) -> Result<f64> {
        let x = ln_x.exp();
        let a = self.law.alpha().value();
        if x >= self.law.series_threshold() {
            let alpha = self.law.alpha();
            let mut sum = 0.0;
            for n in 1..400u32 {
                let nf = n as f64;
                let weight = (-a * nf * ln_x).exp() * (1.0 / (a * nf) - 1.0 / self.r);
                sum += series_coefficient(alpha, n) * weight;
                // a_n vanishes whenever αn is an integer, so stop on the size
                // bound Γ(1+αn)/(π n!) rather than on the term itself.
                let bound = (ln_gamma(1.0 + a * nf) - ln_gamma(nf + 1.0)).exp() / PI * weight.abs();
                if bound <= 1e-17 * sum.abs() && n > 2 {
                    break;
                }
            }
            return Ok(sum);
        }
        let (_, sf) = self.law.cdf_sf(x)?;
        let f = self.law.point_ln(ln_x)?.f;
        Ok(sf - x * f / self.r)
    }

    /// `∫ g(x) dx` over `[e^lo, e^hi]`, in the variable ln x.
    fn table_mass(&self, lo: f64, hi: f64) -> Result<f64> {
        let r = self.r;
        let law = &self.law;
        let pts: Vec<f64> = (0..=64).map(|i| lo + (hi - lo) * i as f64 / 64.0).collect();
        let integrand = |t: f64| match law.point_ln(t) {
            Ok(p) => p.f * (1.0 + r - p.elasticity) / r * t.exp(),
            Err(_) => f64::NAN,
        };
        Ok(Quadrature::with_rel(1e-10)
            .integrate_pts(integrand, &pts)
            .into_result()?
            .scalar())
    }

    /// `G^{-1}(u)` for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if u <= 0.5 {
            if u < self.g_lo {
                return self.bisect(
                    |t| Ok(self.g_of(t)?.ln() - u.ln()),
                    self.ln_lo - 1.0,
                    self.ln_lo,
                    true,
                );
            }
            Ok(self.lower.eval(u.ln()).exp())
        } else {
            let v = 1.0 - u;
            if v < self.s_hi {
                return self.bisect(
                    |t| Ok(v.ln() - self.s_of(t)?.ln()),
                    self.ln_hi,
                    self.ln_hi + 1.0,
                    false,
                );
            }
            Ok(self.upper.eval(-v.ln()).exp())
        }
    }

    /// Root of an increasing function of ln x, expanding the bracket outwards
    /// from the table edge.
    fn bisect<F>(&self, h: F, mut lo: f64, mut hi: f64, expand_down: bool) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let val = |t: f64| -> Result<f64> {
            let v = h(t)?;
            // log of an underflowed probability
            Ok(if v.is_nan() {
                if expand_down {
                    -1.0
                } else {
                    1.0
                }
            } else {
                v
            })
        };
        for _ in 0..200 {
            let ok = if expand_down {
                val(lo)? <= 0.0
            } else {
                val(hi)? >= 0.0
            };
            if ok {
                break;
            }
            let w = hi - lo;
            if expand_down {
                hi = lo;
                lo -= 2.0 * w;
            } else {
                lo = hi;
                hi += 2.0 * w;
            }
        }
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if val(m)? < 0.0 {
                lo = m;
            } else {
                hi = m;
            }
            if hi - lo < 1e-13 * (1.0 + m.abs()) {
                break;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }

    pub fn sample(&self, seed: u64, n: usize, exec: Exec) -> Result<SampleBatch> {
        check_n(n)?;
        let a = self.law.alpha().value();
        let key = stream_key(seed, Stream::X, a, self.r);
        let values = generate(exec, key, n, |rng| {
            let u: f64 = rng.sample(Open01);
            self.quantile(u).unwrap_or(f64::NAN)
        });
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Precondition("inverse-CDF evaluation failed".into()));
        }
        Ok(SampleBatch {
            seed,
            n,
            descriptor: format!("X alpha={a} r={}", self.r),
            values,
        })
    }
}

pub fn sample_x(
    alpha: StabilityIndex,
    r: f64,
    seed: u64,
    n: usize,
    exec: Exec,
) -> Result<SampleBatch> {
    XSampler::new(alpha, r)?.sample(seed, n, exec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Ks,
    LaplaceGrid,
    MellinGrid,
    ChiSquared,
}

/// One Monte Carlo mean compared with its exact value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub arg: f64,
    pub estimate: f64,
    pub target: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub label: String,
    pub statistic: Statistic,
    pub discrepancy: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<GridPoint>,
}

impl IdentityReport {
    fn new(
        label: String,
        statistic: Statistic,
        discrepancy: f64,
        threshold: f64,
        points: Vec<GridPoint>,
    ) -> Self {
        IdentityReport {
            label,
            statistic,
            discrepancy,
            threshold,
            pass: discrepancy <= threshold,
            points,
        }
    }
}

/// Kolmogorov critical value `sqrt(-ln(level/2)/2) / sqrt(n_eff)`.
pub fn ks_threshold(level: f64, n_eff: f64) -> f64 {
    (-(0.5 * level).ln() / 2.0).sqrt() / n_eff.sqrt()
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// `sup |F_n - F|` against a continuous distribution function.
pub fn ks_one_sample<F>(values: &[f64], cdf: F, exec: Exec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    let s = sorted(values);
    let n = s.len() as f64;
    let cdfs: Result<Vec<f64>> = par::map_slice(exec, &s, |&x| cdf(x)).into_iter().collect();
    let mut d: f64 = 0.0;
    for (i, c) in cdfs?.into_iter().enumerate() {
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for v in values {
        n += 1.0;
        let d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    (mean, (m2 / (n - 1.0) / n).sqrt())
}

fn grid_report<T, G>(
    label: String,
    statistic: Statistic,
    args: &[f64],
    transform: T,
    target: G,
) -> Result<IdentityReport>
where
    T: Fn(f64) -> Vec<f64>,
    G: Fn(f64) -> Result<f64>,
{
    let mut points = vec![];
    for &a in args {
        let (estimate, std_error) = mean_and_se(transform(a).into_iter());
        let t = target(a)?;
        points.push(GridPoint {
            arg: a,
            estimate,
            target: t,
            std_error,
            z: (estimate - t).abs() / std_error,
        });
    }
    let worst = points.iter().map(|p| p.z).fold(0.0, f64::max);
    Ok(IdentityReport::new(label, statistic, worst, Z_GATE, points))
}

/// Means of `e^{-λ V}` against `target(λ)`.
pub fn laplace_report<G>(
    label: String,
    values: &[f64],
    lambdas: &[f64],
    target: G,
) -> Result<IdentityReport>
where
    G: Fn(f64) -> Result<f64>,
{
    grid_report(
        label,
        Statistic::LaplaceGrid,
        lambdas,
        |l| values.iter().map(|v| (-l * v).exp()).collect(),
        target,
    )
}

/// Means of `V^p` against `target(p)`.
pub fn mellin_report<G>(
    label: String,
    values: &[f64],
    powers: &[f64],
    target: G,
) -> Result<IdentityReport>
where
    G: Fn(f64) -> Result<f64>,
{
    grid_report(
        label,
        Statistic::MellinGrid,
        powers,
        |p| values.iter().map(|v| v.powf(p)).collect(),
        target,
    )
}

/// One-sample KS against a distribution function at level [`LEVEL`].
pub fn ks_report<F>(label: String, values: &[f64], cdf: F, exec: Exec) -> Result<IdentityReport>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    let d = ks_one_sample(values, cdf, exec)?;
    Ok(IdentityReport::new(
        label,
        Statistic::Ks,
        d,
        ks_threshold(LEVEL, values.len() as f64),
        vec![],
    ))
}

/// Two-sample KS at level [`LEVEL`].
pub fn ks_two_sample_report(label: String, a: &[f64], b: &[f64]) -> IdentityReport {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let d = ks_two_sample(a, b);
    IdentityReport::new(
        label,
        Statistic::Ks,
        d,
        ks_threshold(LEVEL, na * nb / (na + nb)),
        vec![],
    )
}

/// Pearson χ² of a `Z_α` sample on `bins` equiprobable bins of the exact law.
pub fn chi_square_report(
    label: String,
    values: &[f64],
    law: &StableLaw,
    bins: usize,
) -> Result<IdentityReport> {
    let mut edges = vec![];
    for k in 1..bins {
        let p = k as f64 / bins as f64;
        let (mut lo, mut hi) = (-60.0f64, 60.0f64);
        for _ in 0..80 {
            let m = 0.5 * (lo + hi);
            if law.cdf(m.exp())? < p {
                lo = m;
            } else {
                hi = m;
            }
        }
        edges.push((0.5 * (lo + hi)).exp());
    }
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[edges.partition_point(|&e| e < v)] += 1;
    }
    let expected = values.len() as f64 / bins as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist =
        ChiSquared::new((bins - 1) as f64).map_err(|e| Error::Precondition(e.to_string()))?;
    let threshold = dist.inverse_cdf(1.0 - LEVEL);
    Ok(IdentityReport::new(
        label,
        Statistic::ChiSquared,
        stat,
        threshold,
        vec![],
    ))
}

/// Distribution function of `M_α`: `1 - E_α(-x^α)`.
pub fn m_cdf(alpha: StabilityIndex, x: f64) -> Result<f64> {
    Ok(1.0 - mittag_leffler(alpha, -x.powf(alpha.value()))?.value)
}

/// Outcome of the exponent calibration for one candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateResult {
    pub label: String,
    pub reports: Vec<IdentityReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KanterCalibration {
    pub candidates: Vec<CandidateResult>,
    pub chosen: String,
}

pub const CALIBRATION_ALPHAS: [f64; 3] = [0.2, 0.5, 0.8];
pub const CALIBRATION_LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Tests each candidate exponent on `b_α(U)` against `E e^{-λZ} = e^{-λ^α}`
/// and returns the unique candidate passing at every α.
pub fn calibrate_kanter_exponent(seed: u64, n: usize, exec: Exec) -> Result<KanterCalibration> {
    check_n(n)?;
    let labels: Vec<&'static str> = exponent_candidates(StabilityIndex::new(0.5)?)
        .into_iter()
        .map(|(l, _)| l)
        .collect();
    let mut candidates = vec![];
    for label in labels {
        let mut reports = vec![];
        for a in CALIBRATION_ALPHAS {
            let alpha = StabilityIndex::new(a)?;
            let e = exponent_candidates(alpha)
                .into_iter()
                .find(|(l, _)| *l == label)
                .map(|(_, e)| e)
                .ok_or_else(|| {
                    Error::Precondition(format!("candidate {label} missing at alpha = {a}"))
                })?;
            let z = sample_z_with(alpha, e, seed, n, exec);
            reports.push(laplace_report(
                format!("laplace alpha={a} exponent {label}"),
                &z,
                &CALIBRATION_LAMBDAS,
                |l| Ok((-l.powf(a)).exp()),
            )?);
        }
        let pass = reports.iter().all(|r| r.pass);
        candidates.push(CandidateResult {
            label: label.to_string(),
            reports,
            pass,
        });
    }
    let passing: Vec<&CandidateResult> = candidates.iter().filter(|c| c.pass).collect();
    if passing.len() != 1 {
        return Err(Error::Precondition(format!(
            "{} Kanter exponent candidates pass the Laplace test; expected exactly one",
            passing.len()
        )));
    }
    let chosen = passing[0].label.clone();
    Ok(KanterCalibration { candidates, chosen })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `Z_α = (α/r)^{1/α} M_α + X_{α,r}`.
    Additive,
    /// `Z_α^r = e^L X_{α,r}^r`, with the Mellin form
    /// `E[X^{rs}] = (1 - s) E[Z^{rs}]`.
    Multiplicative,
}

impl Identity {
    pub fn as_str(self) -> &'static str {
        match self {
            Identity::Additive => "additive",
            Identity::Multiplicative => "multiplicative",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub identity: Identity,
    pub alpha: f64,
    pub r: f64,
    pub n: usize,
    pub seed: u64,
    pub reports: Vec<IdentityReport>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Moment orders as multiples of α, all with finite variance.
pub const MELLIN_GRID: [f64; 5] = [-2.0, -1.0, -0.5, 0.2, 0.45];

/// Two-sample KS between the two sides of the identity, plus a Mellin grid.
pub fn verify_identity(
    which: Identity,
    alpha: StabilityIndex,
    r: f64,
    seed: u64,
    n: usize,
    exec: Exec,
) -> Result<VerificationReport> {
    check_n(n)?;
    let a = alpha.value();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition(format!(
            "identity needs r > 0, got r = {r}"
        )));
    }
    let xs = XSampler::new(alpha, r)?;
    let z = sample_z(alpha, seed, n, exec)?.values;
    let x = xs.sample(seed, n, exec)?.values;
    let powers: Vec<f64> = MELLIN_GRID.iter().map(|m| m * a).collect();
    let reports = match which {
        Identity::Additive => {
            let c = (a / r).powf(1.0 / a);
            let m = sample_m(alpha, seed, n, exec)?.values;
            let comp: Vec<f64> = m.iter().zip(&x).map(|(m, x)| c * m + x).collect();
            vec![
                ks_two_sample_report(
                    format!("KS Z vs (alpha/r)^(1/alpha) M + X, alpha={a} r={r}"),
                    &z,
                    &comp,
                ),
                mellin_report(
                    format!("E[((alpha/r)^(1/alpha) M + X)^p], alpha={a} r={r}"),
                    &comp,
                    &powers,
                    |p| mellin_exact(alpha, p),
                )?,
            ]
        }
        Identity::Multiplicative => {
            let key = stream_key(seed, Stream::ExpFactor, a, r);
            let l = generate(exec, key, n, |rng| rng.sample(Exp1));
            let lhs: Vec<f64> = z.iter().map(|z| z.powf(r)).collect();
            let rhs: Vec<f64> = l.iter().zip(&x).map(|(l, x)| l.exp() * x.powf(r)).collect();
            // E[X^{rs}] = (1 - s) E[Z^{rs}] at rs = p
            vec![
                ks_two_sample_report(format!("KS Z^r vs e^L X^r, alpha={a} r={r}"), &lhs, &rhs),
                mellin_report(
                    format!("E[X^p] vs (1 - p/r) E[Z^p], alpha={a} r={r}"),
                    &x,
                    &powers,
                    |p| Ok((1.0 - p / r) * mellin_exact(alpha, p)?),
                )?,
            ]
        }
    };
    Ok(VerificationReport {
        identity: which,
        alpha: a,
        r,
        n,
        seed,
        reports,
    })
}
