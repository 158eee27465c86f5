//! One-dimensional band-limited functions under a weight: construction,
//! symmetrization, the cosine transform and deflation of a zero at the origin.
//!
//! The construction is an outer function read off a horizontal line inside
//! the upper half-plane:
//!
//! ```text
//! f(x) = exp(-c - Phi(x + iL)) e^{2 pi i s x},
//! Phi(z) = (i/pi) int (1/(z - t) + t/(1 + t^2)) Omega(t) dt,   Omega = log(1/omega_ev)
//! ```
//!
//! `Re Phi(x + iL)` is the Poisson average of `Omega` at height `L`, so `|f|`
//! is an averaged copy of `omega`, lowered by `c` until it sits below `omega`
//! on the audit grid. The spectrum of `exp(-Phi(. + iL))` lies on `[0, inf)`
//! with an `e^{-2 pi L t}` decay; `L = lambda / sigma` pushes all but a
//! negligible part of it below `sigma`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{BmError, Result};
use crate::hilbert::LineHilbert;
use crate::linefft::LineSpectrum;
use crate::sampled::{centered_uniform_grid, SampledFunction, Symmetry};
use crate::weights::{lipschitz_constant, log_integral_poisson, WeightProfile, LIPSCHITZ_CEILING};

pub type Evaluator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Multiplicity threshold for the scaled Taylor coefficients at the origin.
pub const ZERO_THRESHOLD: f64 = 1e-7;
pub const N_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstructOptions {
    /// Height of the lifted line in units of `1/sigma`.
    pub lambda: f64,
    /// Sampling window `[-half_extent, half_extent)`.
    pub half_extent: f64,
    /// Number of samples (a power of two keeps the FFT fast).
    pub points: usize,
    pub leakage_ceiling: f64,
    /// The majorization audit continues geometrically up to this radius.
    pub audit_extent: f64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self { lambda: 4.0, half_extent: 200.0, points: 1 << 16, leakage_ceiling: 1e-4, audit_extent: 1e6 }
    }
}

/// Parameters of the outer-function construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterParams {
    /// `L`, height of the evaluation line.
    pub height: f64,
    /// `c >= 0`, the downward shift of `log |f|`.
    pub offset: f64,
    /// `s`, the modulation frequency (cycles).
    pub shift: f64,
    /// Spectral centroid of the unmodulated factor (cycles).
    pub centroid: f64,
}

#[derive(Clone)]
pub struct BandlimitedCandidate {
    /// Samples on the centered uniform grid.
    pub samples: SampledFunction,
    pub sigma: f64,
    /// Target spectral band in cycles.
    pub band: (f64, f64),
    pub origin_value: Complex64,
    /// Largest difference quotient of the samples.
    pub lipschitz_bound: f64,
    pub l2_norm: f64,
    /// Energy fraction outside `band`, measured on the samples.
    pub leakage: f64,
    /// `max |f| / bound` over the audit points.
    pub majorization_ratio: f64,
    /// Set when the candidate is numerically zero.
    pub annihilated: bool,
    pub outer: Option<OuterParams>,
    eval: Evaluator,
    bound: WeightFn,
}

impl fmt::Debug for BandlimitedCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandlimitedCandidate")
            .field("sigma", &self.sigma)
            .field("band", &self.band)
            .field("origin_value", &self.origin_value)
            .field("leakage", &self.leakage)
            .field("majorization_ratio", &self.majorization_ratio)
            .field("l2_norm", &self.l2_norm)
            .field("annihilated", &self.annihilated)
            .field("outer", &self.outer)
            .finish()
    }
}

impl BandlimitedCandidate {
    /// Builds a candidate from its samples on a centered uniform grid and an
    /// evaluator that agrees with them; `bound` is the majorant `|f|` must respect.
    pub fn from_parts(
        grid: Vec<f64>,
        values: Vec<Complex64>,
        eval: Evaluator,
        bound: WeightFn,
        sigma: f64,
        band: (f64, f64),
    ) -> Result<Self> {
        let samples = SampledFunction::new(grid, values, Symmetry::None)?;
        let h = spacing(&samples)?;
        let vals = samples.values();
        let l2_norm = (vals.iter().map(|v| v.norm_sqr()).sum::<f64>() * h).sqrt();
        let leakage = LineSpectrum::new(vals, h)?.leakage(band.0, band.1);
        let lipschitz_bound = (1..vals.len() - 1)
            .map(|k| (vals[k + 1] - vals[k - 1]).norm() / (2.0 * h))
            .fold(0.0, f64::max);
        let majorization_ratio = samples
            .grid()
            .iter()
            .zip(vals)
            .map(|(&x, v)| ratio(v.norm(), bound(x)))
            .fold(0.0, f64::max);
        let origin_value = eval(0.0);
        Ok(Self {
            samples,
            sigma,
            band,
            origin_value,
            lipschitz_bound,
            l2_norm,
            leakage,
            majorization_ratio,
            annihilated: l2_norm == 0.0,
            outer: None,
            eval,
            bound,
        })
    }

    /// Samples `f` on `ConstructOptions`' grid.
    pub fn from_fn(eval: Evaluator, bound: WeightFn, sigma: f64, band: (f64, f64), opts: &ConstructOptions) -> Result<Self> {
        let grid = centered_uniform_grid(opts.half_extent, opts.points);
        let values = grid.par_iter().map(|&x| eval(x)).collect();
        Self::from_parts(grid, values, eval, bound, sigma, band)
    }

    /// Pointwise product with a cheap factor, keeping samples in sync.
    pub fn multiply<F>(&self, factor: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        let factor = Arc::new(factor);
        let values = self.samples.grid().iter().zip(self.samples.values()).map(|(&x, &v)| v * factor(x)).collect();
        let base = Arc::clone(&self.eval);
        let eval: Evaluator = Arc::new(move |x| base(x) * factor(x));
        Self::from_parts(self.samples.grid().to_vec(), values, eval, Arc::clone(&self.bound), self.sigma, self.band)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (self.eval)(x)
    }

    pub fn evaluator(&self) -> Evaluator {
        Arc::clone(&self.eval)
    }

    /// The majorant `|f| <= bound`.
    pub fn bound(&self, x: f64) -> f64 {
        (self.bound)(x)
    }

    pub fn spacing(&self) -> f64 {
        spacing(&self.samples).expect("candidate grids have at least two points")
    }

    pub fn spectrum(&self) -> LineSpectrum {
        LineSpectrum::new(self.samples.values(), self.spacing()).expect("valid grid")
    }
}

fn spacing(f: &SampledFunction) -> Result<f64> {
    let g = f.grid();
    if g.len() < 3 {
        return Err(BmError::GridTooShort("candidate grid needs at least three points".into()));
    }
    Ok(g[1] - g[0])
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Outer-function candidate for the even weight `omega_ev(x) = phi(|x|)`,
/// with spectrum in `[0, sigma]` (cycles) and `|f| <= omega_ev`.
pub fn construct_bandlimited_1d(phi: &WeightProfile, sigma: f64, opts: &ConstructOptions) -> Result<BandlimitedCandidate> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(BmError::InvalidParameter(format!("sigma = {sigma} must be positive")));
    }
    let li = log_integral_poisson(phi)?;
    if li.divergent {
        return Err(BmError::NotAdmissible(format!(
            "logarithmic integral diverges (partial value {:.4e} still growing under doubling)",
            li.value
        )));
    }
    let lip = lipschitz_constant(phi)?;
    if lip > LIPSCHITZ_CEILING {
        return Err(BmError::NotAdmissible(format!("log-weight is not Lipschitz (slope {lip:.3e})")));
    }
    let lift = Arc::new(LineHilbert::new(&phi.log_function())?);
    let height = opts.lambda / sigma;
    let n = opts.points;
    let grid = centered_uniform_grid(opts.half_extent, n);
    let h = grid[1] - grid[0];
    let phi_at = |x: f64| lift.lift(Complex64::new(x, height));

    // x = k h for k = 0..=n/2; the negative half follows from F(-x) = conj F(x)
    let half: Vec<f64> = (0..=n / 2).map(|k| k as f64 * h).collect();
    let lifted: Vec<Complex64> = half.par_iter().map(|&x| phi_at(x)).collect();
    let far = far_audit_points(opts.half_extent, opts.audit_extent.min(phi.r_max()), phi.grid());
    let lifted_far: Vec<Complex64> = far.par_iter().map(|&x| phi_at(x)).collect();

    let excess = half
        .iter()
        .zip(&lifted)
        .chain(far.iter().zip(&lifted_far))
        .map(|(&x, p)| phi.log_weight(x) - p.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let offset = excess.max(0.0) + 1e-12;

    let outer_half: Vec<Complex64> = lifted.iter().map(|p| (-offset - p).exp()).collect();
    let unmodulated: Vec<Complex64> = (0..n)
        .map(|j| if j >= n / 2 { outer_half[j - n / 2] } else { outer_half[n / 2 - j].conj() })
        .collect();
    let centroid = LineSpectrum::new(&unmodulated, h)?.centroid();
    let shift = (0.5 * sigma - centroid).clamp(0.0, 0.5 * sigma);
    let values: Vec<Complex64> = grid
        .iter()
        .zip(&unmodulated)
        .map(|(&x, &v)| v * Complex64::from_polar(1.0, 2.0 * PI * shift * x))
        .collect();

    let eval_lift = Arc::clone(&lift);
    let eval: Evaluator = Arc::new(move |x: f64| {
        let p = eval_lift.lift(Complex64::new(x, height));
        (-offset - p).exp() * Complex64::from_polar(1.0, 2.0 * PI * shift * x)
    });
    let weight = phi.clone();
    let bound: WeightFn = Arc::new(move |x: f64| weight.weight(x.abs()));

    let mut cand = BandlimitedCandidate::from_parts(grid, values, eval, bound, sigma, (0.0, sigma))?;
    // the audit also covers the far points, where |f| / omega = exp(Omega - c - Re Phi)
    cand.majorization_ratio = cand.majorization_ratio.max((excess - offset).exp());
    cand.outer = Some(OuterParams { height, offset, shift, centroid });
    if cand.leakage > opts.leakage_ceiling {
        return Err(BmError::LeakageTooHigh { ratio: cand.leakage, ceiling: opts.leakage_ceiling });
    }
    Ok(cand)
}

/// Geometric audit radii beyond the sampling window (ratio 1.002), merged
/// with the weight's own grid nodes in that range.
fn far_audit_points(start: f64, end: f64, nodes: &[f64]) -> Vec<f64> {
    let mut pts = Vec::new();
    let mut x = start;
    while x < end {
        x = (x * 1.002).min(end);
        pts.push(x);
    }
    pts.extend(nodes.iter().copied().filter(|&r| r > start && r <= end));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `f_sym(x) = f(x) + f(-x)`, band `[-sigma, sigma]`, majorant `2 omega_ev`.
pub fn symmetrize(f: &BandlimitedCandidate) -> Result<BandlimitedCandidate> {
    let grid = f.samples.grid().to_vec();
    let vals = f.samples.values();
    let n = grid.len();
    let edge = f.eval(-grid[0]);
    // grid is x_j = (j - n/2) h, so -x_j sits at index n - j
    let values: Vec<Complex64> =
        (0..n).map(|j| vals[j] + if j == 0 { edge } else { vals[n - j] }).collect();
    let base = f.evaluator();
    let eval: Evaluator = Arc::new(move |x| base(x) + base(-x));
    let b = Arc::clone(&f.bound);
    let bound: WeightFn = Arc::new(move |x| 2.0 * b(x));
    let mut out = BandlimitedCandidate::from_parts(grid, values, eval, bound, f.sigma, (-f.sigma, f.sigma))?;
    let scale = f.samples.max_abs();
    out.annihilated = out.samples.max_abs() <= 1e-12 * scale;
    out.outer = f.outer;
    Ok(out)
}

/// `T g(y) = int_0^inf g(r) cos(r y) dr` of the piecewise-linear interpolant
/// of `g`, integrated exactly (zero beyond the last sample).
pub fn cosine_transform(g: &SampledFunction, ys: &[f64]) -> Result<SampledFunction> {
    let (r, v) = (g.grid(), g.values());
    if r[0] < 0.0 {
        return Err(BmError::InvalidGrid("cosine transform needs samples on r >= 0".into()));
    }
    if r.len() < 2 {
        return Err(BmError::GridTooShort("need at least two samples".into()));
    }
    // coarse truncation proxy: a tail as heavy as the last sample, carried one more length
    let mass: f64 = r
        .windows(2)
        .zip(v.windows(2))
        .map(|(w, u)| 0.5 * (u[0].norm() + u[1].norm()) * (w[1] - w[0]))
        .sum();
    let end = r[r.len() - 1];
    let end_size = v[v.len() - 1].norm() * end;
    if end_size > 0.1 * mass.max(f64::MIN_POSITIVE) && end_size > 0.0 {
        return Err(BmError::TailNotIntegrable(format!(
            "samples end at r = {end} with |g| r = {end_size:.3e} against int |g| dr = {mass:.3e}"
        )));
    }
    let slopes: Vec<Complex64> = r.windows(2).zip(v.windows(2)).map(|(w, u)| (u[1] - u[0]) / (w[1] - w[0])).collect();
    let values: Vec<Complex64> = ys.par_iter().map(|&y| cosine_of_interpolant(r, v, &slopes, y)).collect();
    SampledFunction::new(ys.to_vec(), values, Symmetry::None)
}

fn cosine_of_interpolant(r: &[f64], v: &[Complex64], slopes: &[Complex64], y: f64) -> Complex64 {
    if y == 0.0 {
        return r.windows(2).zip(v.windows(2)).map(|(w, u)| (u[0] + u[1]) * (0.5 * (w[1] - w[0]))).sum();
    }
    // integrating by parts, the boundary terms telescope:
    // int (v_a + s (t - a)) cos(yt) dt = [v sin(yt)/y + s cos(yt)/y^2]_a^b
    let n = r.len() - 1;
    let boundary = (v[n] * (y * r[n]).sin() - v[0] * (y * r[0]).sin()) / y;
    let inner: Complex64 = r
        .windows(2)
        .zip(slopes)
        .map(|(w, &s)| {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            // cos(yb) - cos(ya) = -2 sin(y mid) sin(y half)
            s * (-2.0 * (y * mid).sin() * (y * half).sin())
        })
        .sum();
    boundary + inner / (y * y)
}

/// `g = (f_sym / 2)` restricted to the half-line, together with the
/// candidate it came from.
#[derive(Clone)]
pub struct LemmaG {
    /// Samples on `r >= 0` (uniform, from the construction grid).
    pub samples: SampledFunction,
    pub sigma: f64,
    pub candidate: BandlimitedCandidate,
    pub symmetrized: BandlimitedCandidate,
    /// `g(0)`.
    pub origin: f64,
    /// `|g(0)| / phi(0)`, the measured constant of the lower bound.
    pub c_measured: f64,
    /// `max |g| / phi` over the samples.
    pub majorization_ratio: f64,
    eval: Evaluator,
}

impl fmt::Debug for LemmaG {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LemmaG")
            .field("sigma", &self.sigma)
            .field("origin", &self.origin)
            .field("c_measured", &self.c_measured)
            .field("majorization_ratio", &self.majorization_ratio)
            .finish()
    }
}

impl LemmaG {
    /// `g(r)`, real.
    pub fn eval(&self, r: f64) -> f64 {
        0.5 * (self.eval)(r).re
    }
}

/// Runs construction, symmetrization and restriction for a radial weight.
pub fn lemma1_g(phi: &WeightProfile, sigma: f64, opts: &ConstructOptions) -> Result<LemmaG> {
    lemma_g_from(construct_bandlimited_1d(phi, sigma, opts)?, phi)
}

/// `g = (f_sym / 2)` on `r >= 0` for an already constructed candidate.
pub fn lemma_g_from(candidate: BandlimitedCandidate, phi: &WeightProfile) -> Result<LemmaG> {
    let sigma = candidate.sigma;
    let symmetrized = symmetrize(&candidate)?;
    if symmetrized.annihilated {
        return Err(BmError::EvaluationFailed("symmetrization annihilated the candidate".into()));
    }
    let start = symmetrized.samples.grid().partition_point(|&x| x < 0.0);
    let grid = symmetrized.samples.grid()[start..].to_vec();
    let values: Vec<f64> = symmetrized.samples.values()[start..].iter().map(|v| 0.5 * v.re).collect();
    let majorization_ratio =
        grid.iter().zip(&values).map(|(&r, &g)| ratio(g.abs(), phi.weight(r))).fold(0.0, f64::max);
    let samples = SampledFunction::from_real(grid, &values, Symmetry::Even)?;
    let origin = 0.5 * symmetrized.origin_value.re;
    Ok(LemmaG {
        samples,
        sigma,
        c_measured: origin.abs() / phi.weight(0.0),
        majorization_ratio,
        origin,
        eval: symmetrized.evaluator(),
        candidate,
        symmetrized,
    })
}

/// Which rescaling branch the deflation took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeflationCase {
    /// `rho^{-N} <= M`: output `f_0 / M`.
    Normalized,
    /// `rho^{-N} > M`: output `rho^N f_0`.
    Scaled,
}

#[derive(Debug, Clone)]
pub struct Deflated {
    pub candidate: BandlimitedCandidate,
    /// Multiplicity of the zero at the origin.
    pub order: usize,
    pub rho: f64,
    /// `max_{|x| <= rho} |f_0| / omega_ev`.
    pub m_weighted: f64,
    pub case: DeflationCase,
    /// `f_0(0) = f^{(N)}(0) / N!`.
    pub f0_origin: Complex64,
}

/// Chebyshev and monomial coefficients of the interpolant of `f(s u)` on
/// `m` Chebyshev points of `u in [-1, 1]`.
fn chebyshev_fit(f: &Evaluator, s: f64, m: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let nodes: Vec<f64> = (0..m).map(|i| (PI * (i as f64 + 0.5) / m as f64).cos()).collect();
    let vals: Vec<Complex64> = nodes.iter().map(|&u| f(s * u)).collect();
    let cheb: Vec<Complex64> = (0..m)
        .map(|k| {
            let c: Complex64 = nodes.iter().zip(&vals).map(|(&u, &v)| v * (k as f64 * u.acos()).cos()).sum();
            c * (if k == 0 { 1.0 } else { 2.0 } / m as f64)
        })
        .collect();
    // T_{k+1} = 2u T_k - T_{k-1}, accumulated in the monomial basis
    let mut mono = vec![Complex64::new(0.0, 0.0); m];
    let mut t_prev = vec![0.0; m];
    let mut t_cur = vec![0.0; m];
    t_cur[0] = 1.0;
    for (k, &c) in cheb.iter().enumerate() {
        if k == 1 {
            t_prev = t_cur.clone();
            t_cur = vec![0.0; m];
            t_cur[1] = 1.0;
        } else if k > 1 {
            let mut next = vec![0.0; m];
            for j in 0..m - 1 {
                next[j + 1] += 2.0 * t_cur[j];
            }
            for j in 0..m {
                next[j] -= t_prev[j];
            }
            t_prev = std::mem::replace(&mut t_cur, next);
        }
        for j in 0..m {
            mono[j] += c * t_cur[j];
        }
    }
    (cheb, mono)
}

/// Scaled Taylor coefficients `a_k s^k` at the origin. The interval shrinks
/// until the last two Chebyshev coefficients are negligible, so truncation
/// does not leak into the low-order coefficients.
fn resolved_taylor(f: &Evaluator, s0: f64) -> Option<(f64, Vec<Complex64>)> {
    let m = 16;
    let mut s = s0;
    for _ in 0..60 {
        let (cheb, mono) = chebyshev_fit(f, s, m);
        let top = cheb.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if top == 0.0 {
            return None;
        }
        if cheb[m - 1].norm().max(cheb[m - 2].norm()) <= 1e-13 * top {
            return Some((s, mono));
        }
        s *= 0.5;
    }
    None
}

/// Largest `r` with `omega_ev >= 1/2` on `[0, r]`, capped at the sampling window.
pub fn deflation_radius(f: &BandlimitedCandidate) -> f64 {
    let cap = -f.samples.grid()[0];
    let b0 = f.bound(0.0);
    let step = 1e-3;
    let mut r = 0.0;
    while r + step <= cap && f.bound(r + step) >= 0.5 * b0 {
        r += step;
    }
    r
}

/// Deflation: divides out the zero of order `N` at the origin and
/// rescales so that the result is again below `omega_ev`.
pub fn deflate_origin_zero(f: &BandlimitedCandidate, rho: f64) -> Result<Deflated> {
    if !(rho > 0.0) {
        return Err(BmError::InvalidParameter(format!("rho = {rho} must be positive")));
    }
    let eval = f.evaluator();
    let (s, coeffs) = resolved_taylor(&eval, (0.1 / f.sigma).min(1.0)).ok_or(BmError::ZeroDetectionFailed(N_MAX))?;
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let order = (0..=N_MAX)
        .find(|&k| coeffs[k].norm() >= ZERO_THRESHOLD * scale)
        .ok_or(BmError::ZeroDetectionFailed(N_MAX))?;

    let tail: Vec<Complex64> = coeffs[order..].to_vec();
    let near = 0.5 * s;
    let s_pow = s.powi(order as i32);
    let series = move |x: f64| -> Complex64 {
        let u = x / s;
        tail.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c) / s_pow
    };
    let base = f.evaluator();
    let f0 = move |x: f64| -> Complex64 {
        if order == 0 {
            base(x)
        } else if x.abs() <= near {
            series(x)
        } else {
            base(x) / x.powi(order as i32)
        }
    };
    let f0_origin = f0(0.0);

    let grid = f.samples.grid();
    let raw: Vec<Complex64> = grid
        .iter()
        .zip(f.samples.values())
        .map(|(&x, &v)| if order == 0 { v } else if x.abs() <= near { f0(x) } else { v / x.powi(order as i32) })
        .collect();
    let m_weighted = grid
        .iter()
        .zip(&raw)
        .filter(|(&x, _)| x.abs() <= rho)
        .map(|(&x, v)| ratio(v.norm(), f.bound(x)))
        .fold(0.0, f64::max);
    let rho_n = rho.powi(order as i32);
    let (case, factor) =
        if m_weighted * rho_n >= 1.0 { (DeflationCase::Normalized, 1.0 / m_weighted) } else { (DeflationCase::Scaled, rho_n) };
    let values = raw.iter().map(|v| v * factor).collect();
    let eval: Evaluator = Arc::new(move |x| f0(x) * factor);
    let mut candidate =
        BandlimitedCandidate::from_parts(grid.to_vec(), values, eval, Arc::clone(&f.bound), f.sigma, f.band)?;
    candidate.outer = f.outer;
    Ok(Deflated { candidate, order, rho, m_weighted, case, f0_origin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::uniform_grid;

    fn unit_bound() -> WeightFn {
        Arc::new(|_| 1.0)
    }

    fn small_opts() -> ConstructOptions {
        ConstructOptions { points: 1 << 14, ..ConstructOptions::default() }
    }

    #[test]
    fn constant_weight_gives_pure_tone() {
        let phi = WeightProfile::preset("const", 1e8).unwrap();
        let sigma = 0.05;
        let c = construct_bandlimited_1d(&phi, sigma, &small_opts()).unwrap();
        let outer = c.outer.unwrap();
        assert!((outer.shift - sigma / 2.0).abs() < 1e-12);
        for &x in &[0.0, 3.3, -17.0, 150.0] {
            let want = Complex64::from_polar(1.0, PI * sigma * x);
            assert!((c.eval(x) - want).norm() < 1e-9, "{x}");
        }
        assert!(c.majorization_ratio <= 1.0 + 1e-9);
        let g = lemma1_g(&phi, sigma, &small_opts()).unwrap();
        for &r in &[0.0, 1.0, 10.0, 100.0] {
            assert!((g.eval(r) - (PI * sigma * r).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn divergent_weight_is_not_admissible() {
        let phi = WeightProfile::preset("exp_abs", 1e8).unwrap();
        assert!(matches!(construct_bandlimited_1d(&phi, 0.05, &small_opts()), Err(BmError::NotAdmissible(_))));
        assert!(matches!(lemma1_g(&phi, 0.05, &small_opts()), Err(BmError::NotAdmissible(_))));
    }

    #[test]
    fn symmetrize_tone_and_odd() {
        let a = 0.02;
        let tone: Evaluator = Arc::new(move |x| Complex64::from_polar(1.0, 2.0 * PI * a * x));
        let opts = small_opts();
        let c = BandlimitedCandidate::from_fn(tone, unit_bound(), 0.05, (0.0, 0.05), &opts).unwrap();
        let s = symmetrize(&c).unwrap();
        for &x in &[0.0, 1.7, -40.0] {
            assert!((s.eval(x) - Complex64::new(2.0 * (2.0 * PI * a * x).cos(), 0.0)).norm() < 1e-12);
        }
        assert!(!s.annihilated);
        let odd: Evaluator = Arc::new(|x: f64| Complex64::new((0.1 * x).sin(), 0.0));
        let c = BandlimitedCandidate::from_fn(odd, unit_bound(), 0.05, (-0.05, 0.05), &opts).unwrap();
        assert!(symmetrize(&c).unwrap().annihilated);
    }

    #[test]
    fn cosine_transform_examples() {
        let eps = 1e-12;
        let chi = SampledFunction::from_real(vec![0.0, 1.0, 1.0 + eps], &[1.0, 1.0, 0.0], Symmetry::Even).unwrap();
        let t = cosine_transform(&chi, &[0.0, 1.0, PI]).unwrap();
        assert!((t.values()[0].re - 1.0).abs() < 1e-11);
        assert!((t.values()[1].re - 1f64.sin()).abs() < 1e-11);
        assert!(t.values()[2].re.abs() < 1e-11);

        let zero = SampledFunction::from_real(vec![0.0, 1.0], &[0.0, 0.0], Symmetry::Even).unwrap();
        assert_eq!(cosine_transform(&zero, &[2.0]).unwrap().values()[0].norm(), 0.0);

        let e = SampledFunction::from_real_fn(uniform_grid(0.0, 60.0, 600_001), Symmetry::Even, |r| (-r).exp()).unwrap();
        let t = cosine_transform(&e, &[0.0, 1.0, 3.0]).unwrap();
        for (v, y) in t.values().iter().zip([0.0, 1.0, 3.0]) {
            assert!((v.re - 1.0 / (1.0 + y * y)).abs() < 1e-9, "{y}");
        }

        let flat = SampledFunction::from_real(vec![0.0, 50.0], &[1.0, 1.0], Symmetry::Even).unwrap();
        assert!(matches!(cosine_transform(&flat, &[1.0]), Err(BmError::TailNotIntegrable(_))));
    }

    #[test]
    fn deflation_simple_zero() {
        let sigma = 0.05;
        let f: Evaluator = Arc::new(move |x| Complex64::new((2.0 * PI * sigma * x).sin(), 0.0));
        let c = BandlimitedCandidate::from_fn(f, unit_bound(), sigma, (-sigma, sigma), &small_opts()).unwrap();
        let d = deflate_origin_zero(&c, 1.0).unwrap();
        assert_eq!(d.order, 1);
        assert!((d.f0_origin.re - 2.0 * PI * sigma).abs() < 1e-10, "{}", d.f0_origin);
        assert!(d.candidate.majorization_ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn deflation_double_zero_and_identity() {
        let sigma = 0.05;
        let env = |x: f64| 0.5 * (-(x / 30.0).powi(2)).exp();
        let f: Evaluator = Arc::new(move |x| Complex64::from_polar(x * x * env(x), PI * sigma * x));
        let big: WeightFn = Arc::new(|_| 500.0);
        let c = BandlimitedCandidate::from_fn(f, big, sigma, (0.0, sigma), &small_opts()).unwrap();
        let d = deflate_origin_zero(&c, 1.0).unwrap();
        assert_eq!(d.order, 2);
        assert!((d.f0_origin - env(0.0)).norm() < 1e-9, "{}", d.f0_origin);

        let g: Evaluator = Arc::new(move |x| Complex64::from_polar(env(x), PI * sigma * x));
        let c = BandlimitedCandidate::from_fn(g, unit_bound(), sigma, (0.0, sigma), &small_opts()).unwrap();
        let d = deflate_origin_zero(&c, 1.0).unwrap();
        assert_eq!(d.order, 0);
        for &x in &[0.0, 2.0, -50.0] {
            assert!((d.candidate.eval(x) - c.eval(x)).norm() < 1e-15);
        }
    }

    #[test]
    fn deflation_failure_on_flat_zero() {
        let f: Evaluator = Arc::new(|x: f64| Complex64::new(x.powi(12) * (-x * x).exp(), 0.0));
        let c = BandlimitedCandidate::from_fn(f, unit_bound(), 0.05, (0.0, 0.05), &small_opts()).unwrap();
        assert!(matches!(deflate_origin_zero(&c, 1.0), Err(BmError::ZeroDetectionFailed(8))));
    }
}
