//! The three frontier curves and the map of the non-unimodality domain.
//!
//! * `R(α)` is the smallest `s` with `h_α^{-s} ≥ 0` on `(0, ∞)`. Writing
//!   `h_α^{-s} = f·(1 + s - E)` with the elasticity `E = -x f'/f` turns the
//!   criterion into `C(s) = min_x (1 + s - E(x)) ≥ 0`, which has the same sign
//!   as `min_x h_α^{-s}` but stays representable in the tails where `f`
//!   underflows. `C` is evaluated on one x-grid per α and bisected in `s`.
//! * `R̃(α) = α sup U_α` and `R̂(α) = α sup V_α`.
//!
//! All three equal α for `α ≤ 1/2`.

use serde::Serialize;

use crate::density::{
    boundary_class, series_coefficient, BoundaryClass, ModeProfile, PowerExponent, StableLaw,
    Verdict,
};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::specfun::{sin_pi, u_alpha, v_of_y, StabilityIndex};

pub const CURVE_TOL: f64 = 1e-4;
pub const MAP_TOL: f64 = 1e-3;

/// Proven bounds `(lower, upper)` on `R(α)`.
pub fn bounds(alpha: StabilityIndex) -> (f64, f64) {
    let a = alpha.value();
    if a <= 0.5 {
        (a, a)
    } else {
        let s = sin_pi(a);
        (0.25 / (1.0 - a), (a / (s * s)).min(a / (1.0 - a)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub alpha: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "R_tilde")]
    pub r_tilde: f64,
    #[serde(rename = "R_hat")]
    pub r_hat: f64,
    pub lower: f64,
    pub upper: f64,
    pub tol: f64,
}

impl FrontierPoint {
    /// Whether the computed values respect the bounds and the ordering of
    /// the three curves.
    pub fn satisfies_invariants(&self) -> bool {
        let t = self.tol;
        let in_bounds = self.lower - t <= self.r && self.r <= self.upper + t;
        if self.alpha <= 0.5 {
            in_bounds
                && (self.r - self.alpha).abs() <= t
                && (self.r_tilde - self.alpha).abs() <= t
                && (self.r_hat - self.alpha).abs() <= t
        } else {
            in_bounds && self.r < self.r_tilde + t && self.r_tilde < self.r_hat + t
        }
    }
}

/// Elasticity samples `(ln x, E(x))` on a log grid refined around the
/// maximiser.
#[derive(Debug, Clone)]
pub struct ElasticityScan {
    pub alpha: f64,
    pub samples: Vec<(f64, f64)>,
    /// Largest elasticity error estimate among the samples near the maximum.
    pub max_error: f64,
}

const SCAN_LN_X: (f64, f64) = (-13.815_510_557_964_274, 13.815_510_557_964_274);
const SCAN_POINTS: usize = 1024;
const REFINE_ROUNDS: usize = 3;
const REFINE_POINTS: usize = 33;

impl ElasticityScan {
    pub fn new(law: &StableLaw, exec: Exec) -> Result<Self> {
        let (lo, hi) = SCAN_LN_X;
        let grid: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64)
            .collect();
        let eval = |lx: &f64| {
            law.point_ln(*lx)
                .map(|p| (*lx, p.elasticity, p.elasticity_error))
        };
        let first: Result<Vec<_>> = par::map_slice(exec, &grid, eval).into_iter().collect();
        let mut samples = first?;
        let mut span = (hi - lo) / (SCAN_POINTS - 1) as f64;
        for _ in 0..REFINE_ROUNDS {
            let (ibest, _) = argmax(&samples);
            let centre = samples[ibest].0;
            let local: Vec<f64> = (0..REFINE_POINTS)
                .map(|i| centre - span + 2.0 * span * i as f64 / (REFINE_POINTS - 1) as f64)
                .filter(|lx| *lx >= lo && *lx <= hi)
                .collect();
            let more: Result<Vec<_>> = par::map_slice(exec, &local, eval).into_iter().collect();
            samples.extend(more?);
            samples.sort_by(|a, b| a.0.total_cmp(&b.0));
            samples.dedup_by(|a, b| a.0 == b.0);
            span = 2.0 * span / (REFINE_POINTS - 1) as f64;
        }
        let (ib, _) = argmax(&samples);
        let max_error = samples[ib.saturating_sub(2)..(ib + 3).min(samples.len())]
            .iter()
            .map(|s| s.2)
            .fold(0.0, f64::max);
        Ok(ElasticityScan {
            alpha: law.alpha().value(),
            samples: samples.into_iter().map(|(lx, e, _)| (lx, e)).collect(),
            max_error,
        })
    }

    /// `sup E`, including the limit `1 + α` at infinity.
    pub fn sup(&self) -> (f64, f64) {
        let (i, e) = argmax_pairs(&self.samples);
        let limit = 1.0 + self.alpha;
        if e >= limit {
            (self.samples[i].0.exp(), e)
        } else {
            (f64::INFINITY, limit)
        }
    }

    /// `C(s) = min_x (1 + s - E(x))` over the sampled points and the limit
    /// at infinity.
    pub fn criterion(&self, s: f64) -> f64 {
        1.0 + s - self.sup().1
    }
}

fn argmax(s: &[(f64, f64, f64)]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in s.iter().enumerate() {
        if v.1 > best.1 {
            best = (i, v.1);
        }
    }
    best
}

fn argmax_pairs(s: &[(f64, f64)]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in s.iter().enumerate() {
        if v.1 > best.1 {
            best = (i, v.1);
        }
    }
    best
}

/// Outcome of the bisection for `R(α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RSearch {
    pub value: f64,
    /// Maximiser of the elasticity (infinite when the supremum is the limit).
    pub argmax_x: f64,
    /// The upper bracket had to be widened by 5%.
    pub widened: bool,
    pub iterations: usize,
}

/// `C(s)` for one α, on a fresh scan.
pub fn criterion(alpha: StabilityIndex, s: f64) -> Result<f64> {
    let law = StableLaw::new(alpha);
    Ok(ElasticityScan::new(&law, Exec::default())?.criterion(s))
}

pub fn compute_r(alpha: StabilityIndex, tol: f64) -> Result<f64> {
    Ok(compute_r_with(alpha, tol, Exec::default())?.value)
}

pub fn compute_r_with(alpha: StabilityIndex, tol: f64, exec: Exec) -> Result<RSearch> {
    check_tol(tol)?;
    let a = alpha.value();
    if a <= 0.5 {
        return Ok(RSearch {
            value: a,
            argmax_x: f64::INFINITY,
            widened: false,
            iterations: 0,
        });
    }
    let law = StableLaw::new(alpha);
    let scan = ElasticityScan::new(&law, exec)?;
    let (mut lo, mut hi) = bounds(alpha);
    let mut widened = false;
    let c_lo = scan.criterion(lo);
    let mut c_hi = scan.criterion(hi);
    if c_hi < 0.0 {
        hi *= 1.05;
        widened = true;
        c_hi = scan.criterion(hi);
        if c_hi < 0.0 {
            return Err(Error::NonMonotoneCriterion {
                s_lo: lo,
                c_lo,
                s_hi: hi,
                c_hi,
            });
        }
    }
    let mut history = vec![(lo, c_lo), (hi, c_hi)];
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let c = scan.criterion(mid);
        history.push((mid, c));
        if c >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    history.sort_by(|p, q| p.0.total_cmp(&q.0));
    for w in history.windows(2) {
        if w[1].1 < w[0].1 {
            return Err(Error::NonMonotoneCriterion {
                s_lo: w[0].0,
                c_lo: w[0].1,
                s_hi: w[1].0,
                c_hi: w[1].1,
            });
        }
    }
    Ok(RSearch {
        value: 0.5 * (lo + hi),
        argmax_x: scan.sup().0,
        widened,
        iterations,
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain {
            what: "tol",
            value: tol,
            domain: "(0, inf)",
        });
    }
    Ok(())
}

/// Maximum of `g` over `ln x ∈ [lo, hi]`: coarse scan then golden-section
/// search. Returns `(argmax ln x, max)`.
fn maximise<G>(g: G, lo: f64, hi: f64, coarse: usize, exec: Exec) -> Result<(f64, f64)>
where
    G: Fn(f64) -> Result<f64> + Sync + Send,
{
    let grid: Vec<f64> = (0..coarse)
        .map(|i| lo + (hi - lo) * i as f64 / (coarse - 1) as f64)
        .collect();
    let vals: Result<Vec<f64>> = par::map_slice(exec, &grid, |t| g(*t)).into_iter().collect();
    let vals = vals?;
    let mut ib = 0;
    for i in 1..vals.len() {
        if vals[i] > vals[ib] {
            ib = i;
        }
    }
    let mut a = grid[ib.saturating_sub(1)];
    let mut b = grid[(ib + 1).min(grid.len() - 1)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    let mut best = (grid[ib], vals[ib]);
    while b - a > 1e-9 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d)?;
        }
    }
    for (t, v) in [(c, gc), (d, gd)] {
        if v > best.1 {
            best = (t, v);
        }
    }
    Ok(best)
}

/// Search range for the suprema of `U_α`, `V_α` in `ln y`.
const SUP_RANGE: (f64, f64) = (-6.907_755_278_982_137, 23.025_850_929_940_457);

/// `α sup U_α`, with the maximiser.
pub fn r_tilde_with(alpha: StabilityIndex, tol: f64, exec: Exec) -> Result<(f64, f64)> {
    check_tol(tol)?;
    let a = alpha.value();
    if a <= 0.5 {
        return Ok((a, f64::INFINITY));
    }
    let (t, m) = maximise(
        |t| u_alpha(alpha, t.exp()),
        SUP_RANGE.0,
        SUP_RANGE.1,
        256,
        exec,
    )?;
    if m < 1.0 {
        return Ok((a, f64::INFINITY));
    }
    Ok((a * m, t.exp()))
}

/// `α sup V_α`, with the maximiser in the variable `y = x^α`.
pub fn r_hat_with(alpha: StabilityIndex, tol: f64, exec: Exec) -> Result<(f64, f64)> {
    check_tol(tol)?;
    let a = alpha.value();
    if a <= 0.5 {
        return Ok((a, f64::INFINITY));
    }
    let (t, m) = maximise(
        |t| v_of_y(alpha, t.exp()),
        SUP_RANGE.0,
        SUP_RANGE.1,
        256,
        exec,
    )?;
    if m < 1.0 {
        return Ok((a, f64::INFINITY));
    }
    Ok((a * m, t.exp()))
}

pub fn compute_r_tilde(alpha: StabilityIndex, tol: f64) -> Result<f64> {
    Ok(r_tilde_with(alpha, tol, Exec::default())?.0)
}

pub fn compute_r_hat(alpha: StabilityIndex, tol: f64) -> Result<f64> {
    Ok(r_hat_with(alpha, tol, Exec::default())?.0)
}

pub fn frontier_point(alpha: StabilityIndex, tol: f64, exec: Exec) -> Result<FrontierPoint> {
    let (lower, upper) = bounds(alpha);
    let r = compute_r_with(alpha, tol, exec)?.value;
    let (r_tilde, _) = r_tilde_with(alpha, tol, exec)?;
    let (r_hat, _) = r_hat_with(alpha, tol, exec)?;
    Ok(FrontierPoint {
        alpha: alpha.value(),
        r,
        r_tilde,
        r_hat,
        lower,
        upper,
        tol,
    })
}

/// Evenly spaced α values, both ends included.
pub fn alpha_grid(alpha_min: f64, alpha_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Precondition("steps must be at least 1".into()));
    }
    let ok = alpha_min > 0.0
        && alpha_max < 1.0
        && (alpha_min < alpha_max || (steps == 1 && alpha_min == alpha_max));
    if !ok {
        return Err(Error::Precondition(format!(
            "alpha range [{alpha_min}, {alpha_max}] must satisfy 0 < min < max < 1"
        )));
    }
    if steps == 1 {
        return Ok(vec![alpha_min]);
    }
    Ok((0..steps)
        .map(|i| alpha_min + (alpha_max - alpha_min) * i as f64 / (steps - 1) as f64)
        .collect())
}

/// One row of a sweep: either the point or the error that stopped it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub alpha: f64,
    pub result: Result<FrontierPoint>,
}

/// Frontier curves on an α-grid, in grid order. Failures are recorded per
/// point and do not stop the sweep.
pub fn sweep(
    alpha_min: f64,
    alpha_max: f64,
    steps: usize,
    tol: f64,
    exec: Exec,
) -> Result<Vec<SweepEntry>> {
    check_tol(tol)?;
    let alphas = alpha_grid(alpha_min, alpha_max, steps)?;
    Ok(par::map_slice(exec, &alphas, |&a| SweepEntry {
        alpha: a,
        result: StabilityIndex::new(a).and_then(|al| frontier_point(al, tol, Exec::Sequential)),
    }))
}

/// `ln f_α(y)` on a log grid in `y`, reused for every power `r`: with
/// `x = y^r`, `ln f_α^r(x) = (1 - r) ln y + ln f_α(y) - ln|r|`.
#[derive(Debug, Clone)]
pub struct ModeGrid {
    pub alpha: f64,
    ln_y: Vec<f64>,
    ln_f: Vec<f64>,
    /// Relative error of f at each node.
    rel_err: Vec<f64>,
}

const MODE_GRID_POINTS: usize = 3000;

impl ModeGrid {
    pub fn new(law: &StableLaw, exec: Exec) -> Result<Self> {
        let alpha = law.alpha();
        let a = alpha.value();
        let beta = alpha.beta();
        let kappa = a / beta;
        // Left end: w_0 = φ_0 y^{-κ} = 200, far into the tail where ln f ≈ -w_0.
        let ln_phi0 = -crate::kanter::ln_b(alpha, 0.0) / beta;
        let lo = (ln_phi0 - 200f64.ln()) / kappa;
        // Right end: every series term beyond the first is below 1e-6 of it.
        let a1 = series_coefficient(alpha, 1).abs();
        let mut hi: f64 = 3f64 * 10f64.ln();
        for n in 2..40u32 {
            let an = series_coefficient(alpha, n).abs();
            if an > 0.0 {
                let t = (1e6 * an / a1).ln() / ((n - 1) as f64 * a);
                hi = hi.max(t);
            }
        }
        let grid: Vec<f64> = (0..MODE_GRID_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / (MODE_GRID_POINTS - 1) as f64)
            .collect();
        let pts: Result<Vec<_>> = par::map_slice(exec, &grid, |t| law.point_ln(*t))
            .into_iter()
            .collect();
        let pts = pts?;
        Ok(ModeGrid {
            alpha: a,
            ln_y: grid,
            ln_f: pts.iter().map(|p| p.ln_f).collect(),
            rel_err: pts
                .iter()
                .map(|p| {
                    if p.f > 0.0 {
                        p.f_abs_error / p.f
                    } else {
                        1e-12
                    }
                })
                .collect(),
        })
    }

    /// Counts strict local maxima of `f_α^r` along increasing x. A maximum
    /// needs a rise and a fall each larger than ten times the local error of
    /// `ln f`; a boundary maximum is a first move downwards.
    pub fn count_maxima(&self, r: f64) -> (bool, usize) {
        let n = self.ln_y.len();
        let ln_r = r.abs().ln();
        let order: Box<dyn Iterator<Item = usize>> = if r > 0.0 {
            Box::new(0..n)
        } else {
            Box::new((0..n).rev())
        };
        #[derive(PartialEq)]
        enum State {
            Start,
            Rising,
            Falling,
        }
        let mut state = State::Start;
        let mut boundary = false;
        let mut interior = 0;
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in order {
            let v = (1.0 - r) * self.ln_y[i] + self.ln_f[i] - ln_r;
            let delta = 10.0 * self.rel_err[i].max(1e-13);
            match state {
                State::Start => {
                    hi = hi.max(v);
                    lo = lo.min(v);
                    if v > lo + delta {
                        state = State::Rising;
                        hi = v;
                    } else if v < hi - delta {
                        state = State::Falling;
                        boundary = true;
                        lo = v;
                    }
                }
                State::Rising => {
                    if v > hi {
                        hi = v;
                    } else if v < hi - delta {
                        interior += 1;
                        state = State::Falling;
                        lo = v;
                    }
                }
                State::Falling => {
                    if v < lo {
                        lo = v;
                    } else if v > lo + delta {
                        state = State::Rising;
                        hi = v;
                    }
                }
            }
        }
        (boundary, interior)
    }
}

/// The verdict predicted by the characterisation of the unimodal powers,
/// given `R(α)`.
pub fn analytic_verdict(alpha: StabilityIndex, r: PowerExponent, big_r: f64) -> Verdict {
    let a = alpha.value();
    let rv = r.value();
    match boundary_class(alpha, r) {
        BoundaryClass::Zero => Verdict::UnimodalNonmonotone,
        BoundaryClass::FinitePositive => {
            if a <= 0.5 {
                Verdict::Monotone
            } else {
                Verdict::UnimodalNonmonotone
            }
        }
        BoundaryClass::Infinite => {
            if a <= 0.5 || rv <= -big_r {
                Verdict::Monotone
            } else {
                Verdict::NotUnimodal
            }
        }
    }
}

fn numeric_verdict(boundary: bool, interior: usize) -> Option<Verdict> {
    match (boundary, interior) {
        (true, 0) => Some(Verdict::Monotone),
        (false, 1) => Some(Verdict::UnimodalNonmonotone),
        (_, k) if k + boundary as usize >= 2 => Some(Verdict::NotUnimodal),
        _ => None,
    }
}

/// Mode profile of `Z_α^r`, cross-checked by counting maxima of the power
/// density on a grid.
pub fn classify_point(alpha: StabilityIndex, r: PowerExponent, tol: f64) -> Result<ModeProfile> {
    check_tol(tol)?;
    let law = StableLaw::new(alpha);
    let big_r = compute_r_with(alpha, tol, Exec::default())?.value;
    let grid = ModeGrid::new(&law, Exec::default())?;
    classify_on(&grid, alpha, r, big_r)
}

fn classify_on(
    grid: &ModeGrid,
    alpha: StabilityIndex,
    r: PowerExponent,
    big_r: f64,
) -> Result<ModeProfile> {
    let analytic = analytic_verdict(alpha, r, big_r);
    let (boundary, interior) = grid.count_maxima(r.value());
    let numeric = numeric_verdict(boundary, interior);
    if numeric != Some(analytic) {
        return Err(Error::Discrepancy {
            alpha: alpha.value(),
            r: r.value(),
            analytic: analytic.as_str().to_string(),
            numeric: match numeric {
                Some(v) => format!(
                    "{} (boundary max {boundary}, interior {interior})",
                    v.as_str()
                ),
                None => format!("unclassifiable (boundary max {boundary}, interior {interior})"),
            },
        });
    }
    Ok(ModeProfile {
        boundary_class: boundary_class(alpha, r),
        interior_maxima: interior,
        verdict: analytic,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeCell {
    pub alpha: f64,
    pub r: f64,
    pub result: Result<ModeProfile>,
}

/// Classifies every `(α, r)` pair; one density grid and one `R(α)` per α.
pub fn mode_map(alphas: &[f64], rs: &[f64], tol: f64, exec: Exec) -> Result<Vec<ModeCell>> {
    check_tol(tol)?;
    let rows = par::map_slice(exec, alphas, |&a| -> Vec<ModeCell> {
        let setup = StabilityIndex::new(a).and_then(|al| {
            let law = StableLaw::new(al);
            let big_r = compute_r_with(al, tol, Exec::Sequential)?.value;
            let grid = ModeGrid::new(&law, Exec::Sequential)?;
            Ok((al, big_r, grid))
        });
        rs.iter()
            .map(|&r| ModeCell {
                alpha: a,
                r,
                result: match &setup {
                    Ok((al, big_r, grid)) => {
                        PowerExponent::new(r).and_then(|pr| classify_on(grid, *al, pr, *big_r))
                    }
                    Err(e) => Err(e.clone()),
                },
            })
            .collect()
    });
    Ok(rows.into_iter().flatten().collect())
}

/// The `(α, r)` grid used for the standard map: α = 0.1..0.9, r = -3..2.
pub fn standard_map_axes() -> (Vec<f64>, Vec<f64>) {
    let alphas = (1..=9).map(|i| i as f64 / 10.0).collect();
    let rs = (0..9).map(|j| -3.0 + 0.625 * j as f64).collect();
    (alphas, rs)
}
