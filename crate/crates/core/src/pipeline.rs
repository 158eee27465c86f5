//! End-to-end radial construction: weight -> 1D candidate -> g -> psi(x) = g(|x|)
//! on R^d, with the spectral certificate from two transform routes.

use crate::error::{BmError, Result};
use crate::onedim_bm::{
    construct_bandlimited_1d, deflate_origin_zero, deflation_radius, lemma_g_from, ConstructOptions, Deflated, LemmaG,
};
use crate::radial_ft::{spectrum_report, structured_route, RadialField, Route, SpectrumReport};
use crate::weights::{admissibility_check, clamp_weight, AdmissibilityReport, Verdict, WeightProfile};

/// Window growth stops once `|g(end)| end^d` is this small against `int |g| r^{d-1} dr`.
pub const WINDOW_TAIL_TOL: f64 = 1e-6;
/// At most this many window doublings.
pub const MAX_WINDOW_DOUBLINGS: usize = 6;
/// `g(0)` counts as zero below this fraction of `max |g|`.
pub const ORIGIN_ZERO_TOL: f64 = 1e-12;

/// Clamp exponent used when `phi` itself is not in `L^2((1 + r)^{2d+2} dr)`.
/// Any `Q > d + 3/2` restores that condition; the larger `2d + 2` makes
/// `|g(end)| end^d` fall like `end^{-(d+2)}`, so a few doublings suffice.
pub fn clamp_exponent(d: usize) -> f64 {
    2.0 * d as f64 + 2.0
}

#[derive(Debug, Clone)]
pub struct RadialOptions {
    pub construct: ConstructOptions,
    /// Extra routes beyond the direct one; `None` picks the dimension's structured route.
    pub routes: Option<Vec<Route>>,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self { construct: ConstructOptions::default(), routes: None }
    }
}

#[derive(Debug, Clone)]
pub struct RadialConstruction {
    pub dimension: usize,
    pub sigma: f64,
    pub admissibility: AdmissibilityReport,
    /// `Q` when the weight was replaced by `min(phi, (1 + r)^{-Q})`.
    pub clamp: Option<f64>,
    /// The weight actually majorized (clamped or not).
    pub weight: WeightProfile,
    pub g: LemmaG,
    pub field: RadialField,
    /// Window actually used for the 1D construction.
    pub half_extent: f64,
    pub deflation: Option<Deflated>,
    /// `max |psi| / omega` over the profile grid and the candidate's far audit
    /// (`|g| <= (|f(r)| + |f(-r)|) / 2` for even `omega`).
    pub majorization_ratio: f64,
    pub l2_norm: f64,
    pub reports: Vec<SpectrumReport>,
}

impl RadialConstruction {
    pub fn worst_leakage(&self) -> f64 {
        self.reports.iter().map(|r| r.leakage_ratio).fold(0.0, f64::max)
    }
}

/// `max |g| end^d / int |g| r^{d-1} dr`, the max over the last 1/128 of the
/// samples so that a zero crossing at the end does not pass for decay.
fn window_tail(g: &LemmaG, d: usize) -> f64 {
    let (r, v) = (g.samples.grid(), g.samples.values());
    let n = r.len();
    let mass: f64 = (1..n)
        .map(|i| 0.5 * (v[i].norm() * r[i].powi(d as i32 - 1) + v[i - 1].norm() * r[i - 1].powi(d as i32 - 1)) * (r[i] - r[i - 1]))
        .sum();
    let envelope = v[n - (n / 128).max(1)..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    envelope * r[n - 1].powi(d as i32) / mass.max(f64::MIN_POSITIVE)
}

fn build_g(phi: &WeightProfile, sigma: f64, opts: &ConstructOptions) -> Result<(LemmaG, Option<Deflated>)> {
    let candidate = construct_bandlimited_1d(phi, sigma, opts)?;
    let scale = candidate.samples.max_abs();
    if candidate.origin_value.norm() > ORIGIN_ZERO_TOL * scale {
        return Ok((lemma_g_from(candidate, phi)?, None));
    }
    let rho = deflation_radius(&candidate);
    let deflated = deflate_origin_zero(&candidate, rho)?;
    let g = lemma_g_from(deflated.candidate.clone(), phi)?;
    Ok((g, Some(deflated)))
}

/// Builds `psi(x) = g(|x|)` for the radial weight `phi(|x|)` and certifies its
/// spectrum by the direct route and the dimension's structured route. The
/// construction window doubles until `g` has decayed against `r^d`. Weights
/// without enough decay for a square-integrable `psi` are clamped first.
pub fn construct_radial(phi: &WeightProfile, d: usize, sigma: f64, opts: &RadialOptions) -> Result<RadialConstruction> {
    if d < 1 {
        return Err(BmError::DimensionInvalid(d));
    }
    let phi = phi.clone().with_dimension(d);
    let admissibility = admissibility_check(&phi, sigma)?;
    if admissibility.verdict == Verdict::Inadmissible {
        return Err(BmError::NotAdmissible(format!(
            "log integral {}{}, Lipschitz constant {:.3e}",
            admissibility.log_integral,
            if admissibility.log_integral_divergent { " (divergent)" } else { "" },
            admissibility.lipschitz_constant
        )));
    }
    let (phi, clamp) = if admissibility.l2_decay_ok {
        (phi, None)
    } else {
        let q = clamp_exponent(d);
        (clamp_weight(&phi, q)?, Some(q))
    };
    // doubling stops at the tolerance, at the cap, or once the construction's
    // noise floor times end^d starts to win; the best window is kept
    let mut copts = opts.construct.clone();
    let mut best: Option<(f64, f64, LemmaG, Option<Deflated>)> = None;
    for _ in 0..=MAX_WINDOW_DOUBLINGS {
        let (g, deflation) = build_g(&phi, sigma, &copts)?;
        let tail = window_tail(&g, d);
        if best.as_ref().is_some_and(|b| tail >= b.0) {
            break;
        }
        best = Some((tail, copts.half_extent, g, deflation));
        if tail <= WINDOW_TAIL_TOL {
            break;
        }
        copts.half_extent *= 2.0;
    }
    let (_, half_extent, g, deflation) = best.expect("at least one window is tried");
    let field = RadialField::new(g.samples.clone(), d)?;
    let routes = opts.routes.clone().unwrap_or_else(|| {
        if d == 1 {
            vec![Route::Direct]
        } else {
            vec![Route::Direct, structured_route(d)]
        }
    });
    let reports = routes.iter().map(|&r| spectrum_report(&field, sigma, r)).collect::<Result<Vec<_>>>()?;
    Ok(RadialConstruction {
        dimension: d,
        sigma,
        admissibility,
        clamp,
        weight: phi,
        majorization_ratio: g.majorization_ratio.max(g.candidate.majorization_ratio),
        l2_norm: field.l2_norm_sq().sqrt(),
        half_extent,
        g,
        field,
        deflation,
        reports,
    })
}
