//! Fourier transforms of radial functions on R^d.
//!
//! Convention: `f_hat(xi) = int f(x) e^{-2 pi i xi.x} dx`. For a radial
//! profile this is
//! `f_hat(rho) = (2 pi)^{d/2} int_0^inf f(r) r^{d-1} Lambda_{d/2-1}(2 pi rho r) dr`
//! with `Lambda_a(y) = J_a(y) / y^a`, which is regular at `rho = 0`.
//! Frequencies are passed either in cycles (`rho`) or angular units
//! (`k = 2 pi rho`); the transform value is the same either way.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::bessel::{bessel_lambda, calibrate_sonine_constant, lambda_series, pq_polynomials, PQPolynomials};
use crate::error::{BmError, Result};
use crate::quadrature::{improper_averaged, simpson_weights, tanh_sinh, GaussLegendre, ImproperRule};
use crate::sampled::{SampledFunction, Symmetry};

/// Last sample must satisfy `|f(end)| end^d <= RADIAL_TAIL_TOL * int |f| r^{d-1} dr`.
pub const RADIAL_TAIL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqUnits {
    /// `k = 2 pi rho`, the variable of the Bessel kernel.
    Angular,
    /// `rho`, the variable of `e^{-2 pi i xi.x}`.
    Cyclic,
}

impl FreqUnits {
    pub fn to_angular(self, xi: f64) -> f64 {
        match self {
            FreqUnits::Angular => xi,
            FreqUnits::Cyclic => 2.0 * PI * xi,
        }
    }

    pub fn from_angular(self, k: f64) -> f64 {
        match self {
            FreqUnits::Angular => k,
            FreqUnits::Cyclic => k / (2.0 * PI),
        }
    }
}

impl fmt::Display for FreqUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FreqUnits::Angular => "angular",
            FreqUnits::Cyclic => "cyclic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Direct,
    OddClosedForm,
    SonineDescent,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Direct => "direct",
            Route::OddClosedForm => "odd-closed-form",
            Route::SonineDescent => "sonine-descent",
        })
    }
}

/// `psi(x) = profile(|x|)` on R^d.
#[derive(Debug, Clone)]
pub struct RadialField {
    profile: SampledFunction,
    d: usize,
    weights: Vec<f64>,
}

/// Surface area of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

impl RadialField {
    pub fn new(profile: SampledFunction, d: usize) -> Result<Self> {
        if d < 1 {
            return Err(BmError::DimensionInvalid(d));
        }
        if profile.grid()[0] < 0.0 {
            return Err(BmError::InvalidGrid("radial profiles live on r >= 0".into()));
        }
        if profile.len() < 3 {
            return Err(BmError::GridTooShort("radial profile needs at least three samples".into()));
        }
        let profile = if profile.symmetry() == Symmetry::None {
            SampledFunction::new(profile.grid().to_vec(), profile.values().to_vec(), Symmetry::Even)?
        } else {
            profile
        };
        let weights = simpson_weights(profile.grid());
        let field = Self { profile, d, weights };
        field.check_tail(d - 1)?;
        Ok(field)
    }

    pub fn profile(&self) -> &SampledFunction {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Largest sampled radius.
    pub fn extent(&self) -> f64 {
        self.profile.extent().1
    }

    /// `int f(r) h(r) dr` by the profile's quadrature weights.
    pub(crate) fn integrate<H: Fn(f64) -> Complex64>(&self, h: H) -> Complex64 {
        self.profile
            .grid()
            .iter()
            .zip(self.profile.values())
            .zip(&self.weights)
            .map(|((&r, &v), &w)| v * h(r) * w)
            .sum()
    }

    /// `sum |f| h |w|` over the nodes, for absolute scales.
    fn integrate_abs<H: Fn(f64) -> f64>(&self, h: H) -> f64 {
        self.profile
            .grid()
            .iter()
            .zip(self.profile.values())
            .zip(&self.weights)
            .map(|((&r, v), &w)| v.norm() * h(r) * w.abs())
            .sum()
    }

    fn abs_moment(&self, power: usize) -> f64 {
        self.profile
            .grid()
            .iter()
            .zip(self.profile.values())
            .zip(&self.weights)
            .map(|((&r, v), &w)| v.norm() * r.powi(power as i32) * w.abs())
            .sum()
    }

    fn check_tail(&self, power: usize) -> Result<()> {
        let end = self.extent();
        let last = self.profile.values()[self.profile.len() - 1].norm();
        let tail = last * end.powi(power as i32 + 1);
        let mass = self.abs_moment(power);
        if tail > 0.0 && tail > RADIAL_TAIL_TOL * mass {
            return Err(BmError::TailNotIntegrable(format!(
                "profile ends at r = {end} with |f| r^{} = {tail:.3e} against int |f| r^{power} dr = {mass:.3e}",
                power + 1
            )));
        }
        Ok(())
    }

    /// `||psi||^2` in L^2(R^d).
    pub fn l2_norm_sq(&self) -> f64 {
        let d = self.d as i32;
        let s: f64 = self
            .profile
            .grid()
            .iter()
            .zip(self.profile.values())
            .zip(&self.weights)
            .map(|((&r, v), &w)| v.norm_sqr() * r.powi(d - 1) * w)
            .sum();
        sphere_area(self.d) * s
    }
}

fn output(xis: &[f64], values: Vec<Complex64>) -> Result<SampledFunction> {
    let mut pairs: Vec<(f64, Complex64)> = xis.iter().copied().zip(values).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.dedup_by(|a, b| a.0 == b.0);
    let (grid, values) = pairs.into_iter().unzip();
    SampledFunction::new(grid, values, Symmetry::None)
}

fn check_xis(xis: &[f64]) -> Result<()> {
    if xis.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(BmError::InvalidParameter("frequency magnitudes must be finite and >= 0".into()));
    }
    Ok(())
}

/// `Lambda_{d/2-1}`, with the closed form for `d = 1`.
fn kernel_lambda(d: usize, y: f64) -> f64 {
    if d == 1 {
        (2.0 / PI).sqrt() * y.cos()
    } else {
        bessel_lambda(d as f64 / 2.0 - 1.0, y)
    }
}

/// Direct Bessel-kernel quadrature at each `|xi|`. The output grid holds the
/// requested magnitudes (sorted) in the caller's units.
pub fn radial_fourier_direct(field: &RadialField, xis: &[f64], units: FreqUnits) -> Result<SampledFunction> {
    check_xis(xis)?;
    let d = field.d;
    let norm = (2.0 * PI).powf(d as f64 / 2.0);
    let values = xis
        .par_iter()
        .map(|&xi| {
            let k = units.to_angular(xi);
            field.integrate(|r| Complex64::new(r.powi(d as i32 - 1) * kernel_lambda(d, k * r), 0.0)) * norm
        })
        .collect();
    output(xis, values)
}

/// `r^{d-1} Lambda(k r)` through `c(d) (cos P + sin Q)(k r) / k^{d-1}`; the
/// polynomial form cancels badly for `k r < d`, where the power series is
/// used instead.
fn odd_kernel(pq: &PQPolynomials, k: f64, r: f64) -> f64 {
    let d = pq.d;
    let y = k * r;
    if y < d as f64 {
        r.powi(d as i32 - 1) * lambda_series(d as f64 / 2.0 - 1.0, y)
    } else {
        pq.eval(y) / k.powi(d as i32 - 1)
    }
}

/// Odd-dimensional route through the cosine/sine polynomial structure.
pub fn radial_fourier_odd(field: &RadialField, xis: &[f64], units: FreqUnits) -> Result<SampledFunction> {
    check_xis(xis)?;
    let d = field.d;
    if d % 2 == 0 {
        return Err(BmError::DimensionNotOdd(d));
    }
    if d == 1 {
        return radial_fourier_direct(field, xis, units);
    }
    let pq = pq_polynomials(d)?;
    let norm = (2.0 * PI).powf(d as f64 / 2.0);
    let values = xis
        .par_iter()
        .map(|&xi| {
            let k = units.to_angular(xi);
            field.integrate(|r| Complex64::new(odd_kernel(&pq, k, r), 0.0)) * norm
        })
        .collect();
    output(xis, values)
}

/// `int g cos(tau r) r^{2m} dr` and `int g sin(tau r) r^{2m+1} dr`,
/// `m = 0..=(d-1)/2`, with the matching absolute scales.
#[derive(Debug, Clone)]
pub struct Moments {
    pub tau: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub cos_scale: Vec<f64>,
    pub sin_scale: Vec<f64>,
}

impl Moments {
    /// Interleaved `[c_0, s_0, c_1, s_1, ...]`.
    pub fn as_list(&self) -> Vec<f64> {
        self.cos.iter().zip(&self.sin).flat_map(|(&c, &s)| [c, s]).collect()
    }

    /// Largest moment relative to its own scale.
    pub fn max_relative(&self) -> f64 {
        let rel = |v: &[f64], s: &[f64]| {
            v.iter().zip(s).map(|(v, s)| if *s > 0.0 { v.abs() / s } else { 0.0 }).fold(0.0, f64::max)
        };
        rel(&self.cos, &self.cos_scale).max(rel(&self.sin, &self.sin_scale))
    }
}

/// Moment integrals of a real profile at angular frequency `tau`.
pub fn moment_integrals(g: &SampledFunction, tau: f64, d: usize) -> Result<Moments> {
    if d % 2 == 0 {
        return Err(BmError::DimensionNotOdd(d));
    }
    if !g.is_real() {
        return Err(BmError::InvalidParameter("moment integrals need a real profile".into()));
    }
    let field = RadialField::new(g.clone(), d)?;
    field.check_tail(d)?;
    let ms = (d - 1) / 2;
    let mut out = Moments { tau, cos: vec![], sin: vec![], cos_scale: vec![], sin_scale: vec![] };
    for m in 0..=ms {
        let (pc, ps) = (2 * m as i32, 2 * m as i32 + 1);
        out.cos.push(field.integrate(|r| Complex64::new((tau * r).cos() * r.powi(pc), 0.0)).re);
        out.sin.push(field.integrate(|r| Complex64::new((tau * r).sin() * r.powi(ps), 0.0)).re);
        out.cos_scale.push(field.abs_moment(2 * m));
        out.sin_scale.push(field.abs_moment(2 * m + 1));
    }
    Ok(out)
}

/// Radius holding all but `1e-10` of `int |f| r^power dr`.
fn effective_extent(field: &RadialField, power: usize) -> f64 {
    let g = field.profile.grid();
    let v = field.profile.values();
    let terms: Vec<f64> = (0..g.len()).map(|i| v[i].norm() * g[i].powi(power as i32) * field.weights[i].abs()).collect();
    let total: f64 = terms.iter().sum();
    let mut tail = 0.0;
    for i in (0..g.len()).rev() {
        tail += terms[i];
        if tail > 1e-10 * total {
            return g[(i + 1).min(g.len() - 1)].max(g[1]);
        }
    }
    g[g.len() - 1]
}

/// Samples of `M(t) = int f(r) r^d Lambda_{(d-1)/2}(t r) dr` (the inner,
/// odd (d+1)-dimensional integral) on a uniform `t` grid with local
/// `INTERP_POINTS`-point interpolation, continued past the table by a fitted
/// power law when the samples support one.
struct InnerTable {
    delta: f64,
    values: Vec<Complex64>,
    /// `M(t) ~ amplitude t^{-power}` beyond the table.
    tail: Option<(Complex64, f64)>,
}

const INTERP_POINTS: usize = 10;
/// Table spacing is `pi / (INNER_OVERSAMPLING r_eff)`.
const INNER_OVERSAMPLING: f64 = 4.0;

impl InnerTable {
    fn end(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.delta
    }

    fn eval(&self, t: f64) -> Complex64 {
        let n = self.values.len();
        let x = t / self.delta;
        if !(x >= 0.0) || x > (n - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let m = INTERP_POINTS.min(n);
        let i0 = (x.floor() as isize - (m as isize / 2 - 1)).clamp(0, (n - m) as isize) as usize;
        // barycentric weights of equispaced nodes: (-1)^j binom(m-1, j)
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        let mut w = 1.0;
        for j in 0..m {
            let dx = x - (i0 + j) as f64;
            if dx == 0.0 {
                return self.values[i0 + j];
            }
            let wj = if j % 2 == 0 { w } else { -w };
            num += self.values[i0 + j] * (wj / dx);
            den += wj / dx;
            w = w * (m - 1 - j) as f64 / (j + 1) as f64;
        }
        num / den
    }

    /// `int_T^inf t M(t) (t^2 - k^2)^{-1/2} dt` under the fitted power law.
    fn tail_integral(&self, k: f64) -> Complex64 {
        let Some((amp, p)) = self.tail else {
            return Complex64::new(0.0, 0.0);
        };
        let t_end = self.end();
        // t = T / v
        let v = tanh_sinh(0.0, 1.0, 6, |v, _| v.powf(p - 2.0) / (t_end * t_end - k * k * v * v).sqrt());
        amp * (t_end.powf(2.0 - p) * v)
    }
}

fn fit_power_tail(values: &[Complex64], delta: f64) -> Option<(Complex64, f64)> {
    let n = values.len();
    if n < 8 {
        return None;
    }
    let t = |i: usize| i as f64 * delta;
    let (i1, i2, i3) = (n / 2, 3 * n / 4, n - 1);
    let (m1, m2, m3) = (values[i1], values[i2], values[i3]);
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if m3.norm() <= 1e-15 * peak {
        return None;
    }
    let p = (m1.norm() / m3.norm()).ln() / (t(i3) / t(i1)).ln();
    if !(p > 1.5) {
        return None;
    }
    let amp = m3 * t(i3).powf(p);
    let predicted = amp * t(i2).powf(-p);
    ((predicted - m2).norm() <= 1e-2 * m2.norm()).then_some((amp, p))
}

/// `max |M(t)| t` over the last tenth of the table.
fn table_tail(values: &[Complex64], delta: f64) -> f64 {
    let n = values.len();
    (n - n / 10 - 1..n).map(|i| values[i].norm() * i as f64 * delta).fold(0.0, f64::max)
}

/// The inner table grows until its unfitted tail is this small against its peak.
const INNER_TRUNC_TOL: f64 = 1e-10;
const MAX_TABLE_DOUBLINGS: usize = 6;

/// Relative size of `|M(T)| T` (against the table peak) above which an
/// unfitted tail is an error.
pub const SONINE_TAIL_TOL: f64 = 1e-3;

/// Even-dimensional route: Sonine's second integral writes `J_{d/2-1}` as an
/// average of `J_{(d-1)/2}` over dilations, so
/// `f_hat(k) = (2 pi)^{d/2} c int_k^inf t M(t) (t^2 - k^2)^{-1/2} dt`
/// with `M` the odd (d+1)-dimensional inner integral (closed form). The
/// outer integral is summed over half periods of `M` and closed by averaged
/// truncations.
pub fn sonine_descent_transform(field: &RadialField, xis: &[f64], units: FreqUnits) -> Result<SampledFunction> {
    check_xis(xis)?;
    let d = field.d;
    if d % 2 == 1 {
        return Err(BmError::DimensionNotEven(d));
    }
    let nu = (d as f64 - 1.0) / 2.0;
    let c = calibrate_sonine_constant(nu, -0.5)?;
    let pq = pq_polynomials(d + 1)?;
    let norm = (2.0 * PI).powf(d as f64 / 2.0);
    let ks: Vec<f64> = xis.iter().map(|&x| units.to_angular(x)).collect();
    let k_max = ks.iter().copied().fold(0.0, f64::max);

    let r_eff = effective_extent(field, d);
    let cut = field.profile.grid().partition_point(|&r| r <= 1.25 * r_eff);
    let nodes: Vec<(f64, Complex64)> = (0..cut)
        .map(|i| (field.profile.grid()[i], field.profile.values()[i] * field.weights[i]))
        .collect();
    let inner = |t: f64| -> Complex64 { nodes.iter().map(|&(r, a)| a * odd_kernel(&pq, t, r)).sum() };

    let delta = PI / (INNER_OVERSAMPLING * r_eff);
    let t_end = (4.0 * k_max).max(16.0 * PI / r_eff);
    let mut n_end = (t_end / delta).ceil() as usize + 1;
    let mut values: Vec<Complex64> = (0..n_end).into_par_iter().map(|i| inner(i as f64 * delta)).collect();
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return output(xis, vec![Complex64::new(0.0, 0.0); xis.len()]);
    }
    // faster-than-power decay (compact support) is neither fitted nor negligible at first
    for _ in 0..MAX_TABLE_DOUBLINGS {
        if fit_power_tail(&values, delta).is_some() || table_tail(&values, delta) <= INNER_TRUNC_TOL * peak {
            break;
        }
        values.extend((n_end..2 * n_end).into_par_iter().map(|i| inner(i as f64 * delta)).collect::<Vec<_>>());
        n_end *= 2;
    }
    let t_end = (n_end - 1) as f64 * delta;
    // unit peak keeps the absolute floor of the averaged rule meaningful
    let values: Vec<Complex64> = values.into_iter().map(|v| v / peak).collect();
    let tail = fit_power_tail(&values, delta);
    let last = values[n_end - 1].norm();
    if tail.is_none() && last * t_end > SONINE_TAIL_TOL {
        return Err(BmError::TailNotConverged(format!(
            "inner integral still at {last:.3e} of its peak at t = {t_end:.3e} with no power-law tail"
        )));
    }
    let table = InnerTable { delta, values, tail };
    let m0 = field.integrate(|r| Complex64::new(r.powi(d as i32 - 1), 0.0)) * lambda_series(d as f64 / 2.0 - 1.0, 0.0);
    let half_period = PI / r_eff;
    let gl = GaussLegendre::standard();

    let values: Result<Vec<Complex64>> = ks
        .par_iter()
        .map(|&k| {
            if k == 0.0 {
                return Ok(m0 * norm);
            }
            // t = k cosh u on the first half period absorbs the endpoint singularity
            let u_end = ((k + half_period) / k).acosh();
            let panels = (u_end / 0.5).ceil() as usize;
            let head = |part: fn(Complex64) -> f64| {
                gl.composite(0.0, u_end, panels, |u| {
                    let t = k * u.cosh();
                    part(table.eval(t)) * t
                })
            };
            let body = |part: fn(Complex64) -> f64| {
                improper_averaged(k + half_period, ImproperRule::new(half_period), |t| {
                    part(table.eval(t)) * t / (t * t - k * k).sqrt()
                })
            };
            let re = head(|z| z.re) + body(|z| z.re)?;
            let im = if field.profile.is_real() { 0.0 } else { head(|z| z.im) + body(|z| z.im)? };
            let total = Complex64::new(re, im) + table.tail_integral(k);
            Ok(total * (norm * c * peak))
        })
        .collect();
    output(xis, values?)
}

/// Inner integral `int r^{d/2+1/2} f(r) J_{d/2-1/2}(tau r) dr` alone (even `d`).
pub fn sonine_inner_integral(field: &RadialField, tau: f64) -> Result<Complex64> {
    let d = field.d;
    if d % 2 == 1 {
        return Err(BmError::DimensionNotEven(d));
    }
    let pq = pq_polynomials(d + 1)?;
    // r^{d/2+1/2} J_{(d-1)/2}(tau r) = tau^{(d-1)/2} r^d Lambda(tau r)
    let scale = tau.powf((d as f64 - 1.0) / 2.0);
    Ok(field.integrate(|r| Complex64::new(odd_kernel(&pq, tau, r), 0.0)) * scale)
}

/// `|sonine_inner_integral|` relative to the same integral with the integrand
/// replaced by its modulus.
pub fn sonine_inner_relative(field: &RadialField, tau: f64) -> Result<f64> {
    let value = sonine_inner_integral(field, tau)?.norm();
    let pq = pq_polynomials(field.d + 1)?;
    let scale = tau.powf((field.d as f64 - 1.0) / 2.0)
        * field.integrate_abs(|r| odd_kernel(&pq, tau, r).abs());
    Ok(if scale > 0.0 { value / scale } else { 0.0 })
}

/// Shell-binned spectral energy of a radial field.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub route: Route,
    pub dimension: usize,
    /// Ball radius in cycles.
    pub target_radius: f64,
    /// Bin edges in cycles, `shell_energies.len() + 1` of them.
    pub bin_edges: Vec<f64>,
    pub shell_energies: Vec<f64>,
    /// Sum of the shell energies.
    pub total_energy: f64,
    /// `||f||^2` computed from the profile.
    pub plancherel_energy: f64,
    pub plancherel_mismatch: f64,
    pub leakage_ratio: f64,
}

/// Bins spanning `[0, SPECTRUM_SPAN * sigma]`.
pub const SPECTRUM_BINS: usize = 64;
pub const SPECTRUM_SPAN: f64 = 4.0;

impl SpectrumReport {
    pub fn to_text(&self) -> String {
        format!(
            "route = {}\ndimension = {}\nunits = cyclic\ntarget_radius = {:.6e}\nbins = {}\ntotal_energy = {:.12e}\nplancherel_energy = {:.12e}\nplancherel_mismatch = {:.3e}\nleakage_ratio = {:.6e}\n",
            self.route,
            self.dimension,
            self.target_radius,
            self.shell_energies.len(),
            self.total_energy,
            self.plancherel_energy,
            self.plancherel_mismatch,
            self.leakage_ratio
        )
    }
}

/// Transform through a named route.
pub fn radial_transform(field: &RadialField, xis: &[f64], units: FreqUnits, route: Route) -> Result<SampledFunction> {
    match route {
        Route::Direct => radial_fourier_direct(field, xis, units),
        Route::OddClosedForm => radial_fourier_odd(field, xis, units),
        Route::SonineDescent => sonine_descent_transform(field, xis, units),
    }
}

/// The independent non-direct route for this dimension.
pub fn structured_route(d: usize) -> Route {
    if d % 2 == 1 {
        Route::OddClosedForm
    } else {
        Route::SonineDescent
    }
}

/// Energy `S_{d-1} int |f_hat(rho)|^2 rho^{d-1} drho` per radial bin and the
/// fraction of it beyond `sigma` (cycles).
pub fn spectrum_report(field: &RadialField, sigma: f64, route: Route) -> Result<SpectrumReport> {
    if !(sigma > 0.0) {
        return Err(BmError::InvalidParameter(format!("sigma = {sigma} must be positive")));
    }
    let d = field.d;
    let width = SPECTRUM_SPAN * sigma / SPECTRUM_BINS as f64;
    let edges: Vec<f64> = (0..=SPECTRUM_BINS).map(|j| j as f64 * width).collect();
    let gl = GaussLegendre::new(8);
    let mut nodes = Vec::with_capacity(SPECTRUM_BINS * gl.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for w in edges.windows(2) {
        for (x, wt) in gl.mapped(w[0], w[1]) {
            nodes.push(x);
            weights.push(wt);
        }
    }
    let ft = radial_transform(field, &nodes, FreqUnits::Cyclic, route)?;
    // nodes are increasing and distinct, so the output is in the same order
    let area = sphere_area(d);
    let shell_energies: Vec<f64> = (0..SPECTRUM_BINS)
        .map(|b| {
            (b * gl.len()..(b + 1) * gl.len())
                .map(|i| weights[i] * ft.values()[i].norm_sqr() * nodes[i].powi(d as i32 - 1))
                .sum::<f64>()
                * area
        })
        .collect();
    let total_energy: f64 = shell_energies.iter().sum();
    let inside: f64 = shell_energies[..SPECTRUM_BINS / SPECTRUM_SPAN as usize].iter().sum();
    let outside: f64 = shell_energies[SPECTRUM_BINS / SPECTRUM_SPAN as usize..].iter().sum();
    let plancherel_energy = field.l2_norm_sq();
    let leakage_ratio = if total_energy > 0.0 { (outside / (inside + outside)).clamp(0.0, 1.0) } else { 0.0 };
    Ok(SpectrumReport {
        route,
        dimension: d,
        target_radius: sigma,
        bin_edges: edges,
        shell_energies,
        total_energy,
        plancherel_energy,
        plancherel_mismatch: (total_energy - plancherel_energy).abs() / plancherel_energy.max(f64::MIN_POSITIVE),
        leakage_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::uniform_grid;

    fn field(d: usize, extent: f64, n: usize, f: impl Fn(f64) -> f64) -> RadialField {
        let p = SampledFunction::from_real_fn(uniform_grid(0.0, extent, n), Symmetry::Even, f).unwrap();
        RadialField::new(p, d).unwrap()
    }

    fn gaussian(d: usize) -> RadialField {
        field(d, 8.0, 8001, |r| (-PI * r * r).exp())
    }

    #[test]
    fn gaussian_is_self_reciprocal_in_three_dimensions() {
        let f = gaussian(3);
        let xis: Vec<f64> = (0..=50).map(|k| k as f64 * 0.1).collect();
        for route in [radial_fourier_direct, radial_fourier_odd] {
            let t = route(&f, &xis, FreqUnits::Cyclic).unwrap();
            for (&xi, v) in t.grid().iter().zip(t.values()) {
                assert!((v.re - (-PI * xi * xi).exp()).abs() < 1e-8, "xi = {xi}: {v}");
            }
        }
        // angular units give the same values at k = 2 pi xi
        let ks: Vec<f64> = xis.iter().map(|x| 2.0 * PI * x).collect();
        let a = radial_fourier_direct(&f, &ks, FreqUnits::Angular).unwrap();
        let c = radial_fourier_direct(&f, &xis, FreqUnits::Cyclic).unwrap();
        for (u, v) in a.values().iter().zip(c.values()) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn one_dimensional_indicator_gives_sinc() {
        let n = 20_001;
        let mut grid = uniform_grid(0.0, 1.0, n);
        grid.push(1.0 + 1e-12);
        grid.push(2.0);
        let mut vals = vec![1.0; n];
        vals.extend([0.0, 0.0]);
        let chi = RadialField::new(SampledFunction::from_real(grid, &vals, Symmetry::Even).unwrap(), 1).unwrap();
        let xis = [0.0, 0.25, 0.7, 3.0];
        let t = radial_fourier_direct(&chi, &xis, FreqUnits::Cyclic).unwrap();
        for (&xi, v) in t.grid().iter().zip(t.values()) {
            let exact = if xi == 0.0 { 2.0 } else { (2.0 * PI * xi).sin() / (PI * xi) };
            assert!((v.re - exact).abs() < 1e-6, "{xi}: {v} vs {exact}");
        }
    }

    #[test]
    fn zero_profile() {
        let f = field(4, 5.0, 101, |_| 0.0);
        let t = radial_fourier_direct(&f, &[0.0, 1.0], FreqUnits::Cyclic).unwrap();
        assert!(t.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn three_dimensional_closed_form_is_the_sine_transform() {
        let pq = pq_polynomials(3).unwrap();
        for &y in &[3.5, 10.0, 41.0] {
            let want = (2.0 / PI).sqrt() * y * y.sin();
            assert!((pq.eval(y) - want).abs() < 1e-13 * y, "{y}");
        }
        // the route equals |xi|^{-1} sqrt(2/pi) int g sin(|xi| r) r dr up to (2 pi)^{3/2}
        let f = field(3, 40.0, 40_001, |r| (-r).exp());
        let k = 3.0;
        let t = radial_fourier_odd(&f, &[k], FreqUnits::Angular).unwrap().values()[0].re;
        let sine = f.integrate(|r| Complex64::new((k * r).sin() * r, 0.0)).re;
        let want = (2.0 * PI).powf(1.5) * (2.0 / PI).sqrt() / k * sine;
        assert!((t - want).abs() < 1e-12 * want.abs(), "{t} vs {want}");
    }

    #[test]
    fn five_dimensional_routes_agree() {
        let f = field(5, 60.0, 60_001, |r| r * (-r).exp());
        let xis = [0.0, 0.05, 0.3, 1.0, 2.5];
        let a = radial_fourier_direct(&f, &xis, FreqUnits::Cyclic).unwrap();
        let b = radial_fourier_odd(&f, &xis, FreqUnits::Cyclic).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert!((u - v).norm() <= 1e-8 * u.norm(), "{u} vs {v}");
        }
    }

    #[test]
    fn sonine_route_follows_compactly_supported_profiles() {
        // the inner integral of a bump decays like exp(-sqrt t), past any power-law fit
        let f = field(2, 1.0, 5001, |r| if r < 1.0 { (-1.0 / (1.0 - r * r)).exp() } else { 0.0 });
        let xis: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
        let a = radial_fourier_direct(&f, &xis, FreqUnits::Cyclic).unwrap();
        let b = sonine_descent_transform(&f, &xis, FreqUnits::Cyclic).unwrap();
        let peak = a.values()[0].norm();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert!((u - v).norm() <= 1e-6 * peak, "{u} vs {v}");
        }
    }

    #[test]
    fn moments_of_the_unit_indicator() {
        let mut grid = uniform_grid(0.0, 1.0, 2001);
        grid.push(1.0 + 1e-12);
        let mut vals = vec![1.0; 2001];
        vals.push(0.0);
        let g = SampledFunction::from_real(grid, &vals, Symmetry::Even).unwrap();
        let m = moment_integrals(&g, PI, 1).unwrap();
        assert!(m.cos[0].abs() < 1e-12);
        assert!((m.sin[0] - 1.0 / PI).abs() < 1e-12);
        let zero = SampledFunction::from_real(uniform_grid(0.0, 1.0, 11), &[0.0; 11], Symmetry::Even).unwrap();
        let m = moment_integrals(&zero, 2.0, 5).unwrap();
        assert_eq!(m.as_list(), vec![0.0; 6]);
        assert!(matches!(moment_integrals(&g, 1.0, 2), Err(BmError::DimensionNotOdd(2))));
    }

    #[test]
    fn slow_tail_is_rejected() {
        let p = SampledFunction::from_real_fn(uniform_grid(0.0, 100.0, 1001), Symmetry::Even, |r| 1.0 / (1.0 + r)).unwrap();
        assert!(matches!(RadialField::new(p, 3), Err(BmError::TailNotIntegrable(_))));
        assert!(matches!(
            RadialField::new(SampledFunction::from_real(vec![0.0, 1.0, 2.0], &[0.0; 3], Symmetry::Even).unwrap(), 0),
            Err(BmError::DimensionInvalid(0))
        ));
    }

    #[test]
    fn gaussian_in_two_dimensions_by_sonine_descent() {
        let f = gaussian(2);
        let xis = [0.0, 0.1, 0.5, 1.0, 2.0];
        let t = sonine_descent_transform(&f, &xis, FreqUnits::Cyclic).unwrap();
        for (&xi, v) in t.grid().iter().zip(t.values()) {
            assert!((v.re - (-PI * xi * xi).exp()).abs() < 1e-6, "xi = {xi}: {v}");
        }
        let t = radial_fourier_direct(&f, &xis, FreqUnits::Cyclic).unwrap();
        for (&xi, v) in t.grid().iter().zip(t.values()) {
            assert!((v.re - (-PI * xi * xi).exp()).abs() < 1e-8, "xi = {xi}: {v}");
        }
        assert!(matches!(sonine_descent_transform(&gaussian(3), &xis, FreqUnits::Cyclic), Err(BmError::DimensionNotEven(3))));
    }

    #[test]
    fn four_dimensional_exponential_by_both_routes() {
        let f = field(4, 40.0, 40_001, |r| (-r).exp());
        let xis = [0.5, 1.0, 3.0];
        let a = radial_fourier_direct(&f, &xis, FreqUnits::Cyclic).unwrap();
        let b = sonine_descent_transform(&f, &xis, FreqUnits::Cyclic).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert!((u - v).norm() <= 1e-6 * u.norm(), "{u} vs {v}");
        }
    }

    #[test]
    fn gaussian_spectrum_sits_inside_a_wide_ball() {
        let f = gaussian(3);
        let rep = spectrum_report(&f, 10.0, Route::Direct).unwrap();
        assert!(rep.leakage_ratio <= 1e-10, "{}", rep.leakage_ratio);
        assert!(rep.plancherel_mismatch <= 1e-6, "{}", rep.plancherel_mismatch);
        assert!(rep.shell_energies.iter().all(|&e| e >= 0.0));
        let odd = spectrum_report(&f, 10.0, Route::OddClosedForm).unwrap();
        assert!((odd.leakage_ratio - rep.leakage_ratio).abs() <= 1e-5);
    }

    /// Profile whose transform is a narrow Gaussian shell around `|xi| = c` (cycles).
    fn shell_profile(d: usize, c: f64, w: f64) -> RadialField {
        let gl = GaussLegendre::new(40);
        let shell = |rho: f64| (-((rho - c) / w).powi(2)).exp();
        let norm = (2.0 * PI).powf(d as f64 / 2.0);
        let grid = uniform_grid(0.0, 8.0 / w, 6001);
        let p = SampledFunction::from_real_fn(grid, Symmetry::Even, |r| {
            norm * gl.composite(c - 7.0 * w, c + 7.0 * w, 8, |rho| {
                shell(rho) * rho.powi(d as i32 - 1) * kernel_lambda(d, 2.0 * PI * rho * r)
            })
        })
        .unwrap();
        RadialField::new(p, d).unwrap()
    }

    #[test]
    fn shell_spectrum_leaks_everything() {
        let sigma = 0.1;
        for d in [3, 4] {
            let f = shell_profile(d, 2.5 * sigma, 0.15 * sigma);
            let rep = spectrum_report(&f, sigma, Route::Direct).unwrap();
            assert!(rep.leakage_ratio >= 0.99, "d = {d}: {}", rep.leakage_ratio);
            let other = spectrum_report(&f, sigma, structured_route(d)).unwrap();
            assert!((other.leakage_ratio - rep.leakage_ratio).abs() <= 1e-5, "d = {d}");
        }
    }
}
