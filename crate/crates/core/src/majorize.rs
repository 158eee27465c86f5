//! Reduction of a non-radial weight `omega(x)` on R^d to a radial weight
//! `exp(-Omega_1(|x|))` with `Omega_1 >= Omega = log(1/omega)`.
//!
//! `Omega` is bounded on dyadic annuli `E_0 = B(0,2)`, `E_j = B(0,2^{j+1}) \ B(0,2^j)`
//! by `lambda_j`, the piecewise-constant majorant is smoothed into a Lipschitz
//! envelope, and the Hoelder chain decides whether the envelope keeps a finite
//! Poisson integral.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{BmError, Result};
use crate::expr::Expr;
use crate::weights::{admissibility_check, preset_grid, AdmissibilityReport, WeightProfile, DEFAULT_R_MAX};

pub const DEFAULT_J_MAX: usize = 40;
/// Safety factor on the finite-difference Lipschitz estimate of a cell.
pub const LIPSCHITZ_SAFETY: f64 = 2.0;
/// Relative slack allowed in the majorization audit.
pub const AUDIT_TOL: f64 = 1e-9;

type LogFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `Omega(x) = log(1/omega(x))` on R^d.
#[derive(Clone)]
pub struct NonRadialWeight {
    name: String,
    dim: usize,
    log_fn: LogFn,
}

impl fmt::Debug for NonRadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonRadialWeight").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

impl NonRadialWeight {
    /// `omega` given as an expression in `x1..xd`.
    pub fn from_expression(src: &str, d: usize) -> Result<Self> {
        if d < 1 {
            return Err(BmError::DimensionInvalid(d));
        }
        let e = Expr::parse(src)?;
        if e.max_var() > d {
            return Err(BmError::Parse(format!("expression uses x{} but d = {d}", e.max_var())));
        }
        Ok(Self { name: src.trim().to_string(), dim: d, log_fn: Arc::new(move |x| -e.log_eval(x)) })
    }

    /// A radial profile lifted to R^d.
    pub fn from_radial(profile: WeightProfile, d: usize) -> Self {
        let name = profile.name().to_string();
        Self {
            name,
            dim: d,
            log_fn: Arc::new(move |x| profile.log_weight(x.iter().map(|v| v * v).sum::<f64>().sqrt())),
        }
    }

    /// A preset name lifts the radial preset; anything else is an expression.
    pub fn parse(spec: &str, d: usize) -> Result<Self> {
        match WeightProfile::preset(spec, DEFAULT_R_MAX) {
            Ok(p) => Ok(Self::from_radial(p, d)),
            Err(_) => Self::from_expression(spec, d),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn log_weight(&self, x: &[f64]) -> f64 {
        (self.log_fn)(x)
    }
}

#[derive(Debug, Clone)]
pub struct AnnulusOptions {
    pub j_max: usize,
    /// Cells in the initial cover of each annulus.
    pub initial_cells: usize,
    /// Stop refining once the bound is within this fraction of the best sample.
    pub rel_tol: f64,
    pub max_evaluations: usize,
}

impl Default for AnnulusOptions {
    fn default() -> Self {
        Self { j_max: DEFAULT_J_MAX, initial_cells: 4096, rel_tol: 1e-7, max_evaluations: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusDecomposition {
    pub d: usize,
    pub j_max: usize,
    /// Certified upper bounds `lambda_j >= max_{E_j} Omega`, floored at 0.
    pub lambdas: Vec<f64>,
    /// Largest sampled value per annulus (lower bound for the true maximum).
    pub sampled_max: Vec<f64>,
    pub gamma: f64,
    /// `Omega(0)`, subtracted before the maxima are taken.
    pub origin_log_weight: f64,
    pub evaluations: usize,
}

/// Inner and outer radius of `E_j`.
pub fn annulus_radii(j: usize) -> (f64, f64) {
    let outer = 2f64.powi(j as i32 + 1);
    (if j == 0 { 0.0 } else { outer / 2.0 }, outer)
}

/// Box in (radius, cube-face coordinates). Directions are the face points
/// projected onto the sphere, which is 1-Lipschitz from the cube surface.
#[derive(Debug, Clone)]
struct Cell {
    r0: f64,
    r1: f64,
    axis: usize,
    sign: f64,
    u0: Vec<f64>,
    u1: Vec<f64>,
}

struct Scored {
    cell: Cell,
    upper: f64,
    h: f64,
    /// Parameter direction with the largest bound contribution (0 = radius).
    widest: usize,
}

impl PartialEq for Scored {
    fn eq(&self, o: &Self) -> bool {
        self.upper.total_cmp(&o.upper) == Ordering::Equal
    }
}
impl Eq for Scored {}
impl PartialOrd for Scored {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Scored {
    fn cmp(&self, o: &Self) -> Ordering {
        self.upper.total_cmp(&o.upper)
    }
}

fn point(d: usize, r: f64, axis: usize, sign: f64, u: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(d);
    let mut it = u.iter();
    for k in 0..d {
        p.push(if k == axis { sign } else { *it.next().unwrap() });
    }
    let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    p.iter_mut().for_each(|v| *v *= r / n);
    p
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct AnnulusSearch<'a> {
    omega: &'a NonRadialWeight,
    shift: f64,
    evals: usize,
    best: f64,
}

impl AnnulusSearch<'_> {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.evals += 1;
        let v = self.omega.log_weight(x) - self.shift;
        if !v.is_finite() {
            return Err(BmError::EvaluationFailed(format!("log-weight is {v} at {x:?}")));
        }
        self.best = self.best.max(v);
        Ok(v)
    }

    /// Center value plus `sum_i C_i h_i` over the parameter directions, with
    /// `C_i` from the center to the two edge probes along direction `i` and
    /// `h_i` the largest displacement in that direction.
    fn score(&mut self, cell: Cell) -> Result<Scored> {
        let d = self.omega.dim();
        let rc = 0.5 * (cell.r0 + cell.r1);
        let uc: Vec<f64> = cell.u0.iter().zip(&cell.u1).map(|(a, b)| 0.5 * (a + b)).collect();
        let xc = point(d, rc, cell.axis, cell.sign, &uc);
        let vc = self.value(&xc)?;
        let slope_along = |s: &mut Self, ends: [Vec<f64>; 2]| -> Result<f64> {
            let mut slope = 0.0f64;
            for x in ends {
                let dx = dist(&x, &xc);
                let v = s.value(&x)?;
                if dx > 0.0 {
                    slope = slope.max((v - vc).abs() / dx);
                }
            }
            Ok(slope)
        };
        let h_r = 0.5 * (cell.r1 - cell.r0);
        let radial = [cell.r0, cell.r1].map(|r| point(d, r, cell.axis, cell.sign, &uc));
        let mut terms = vec![slope_along(self, radial)? * h_r];
        let mut h = h_r * h_r;
        for i in 0..uc.len() {
            let ends = [cell.u0[i], cell.u1[i]].map(|edge| {
                let mut u = uc.clone();
                u[i] = edge;
                point(d, rc, cell.axis, cell.sign, &u)
            });
            let h_i = cell.r1 * 0.5 * (cell.u1[i] - cell.u0[i]);
            terms.push(slope_along(self, ends)? * h_i);
            h += h_i * h_i;
        }
        let widest = (0..terms.len()).max_by(|&a, &b| terms[a].total_cmp(&terms[b])).unwrap_or(0);
        let bound: f64 = terms.iter().sum();
        Ok(Scored { upper: vc + LIPSCHITZ_SAFETY * bound, h: h.sqrt(), widest, cell })
    }
}

/// Halves the cell along parameter direction `axis` (0 = radius).
fn split(c: &Cell, axis: usize) -> [Cell; 2] {
    let (mut lo, mut hi) = (c.clone(), c.clone());
    if axis == 0 {
        let rm = 0.5 * (c.r0 + c.r1);
        lo.r1 = rm;
        hi.r0 = rm;
    } else {
        let i = axis - 1;
        let mid = 0.5 * (c.u0[i] + c.u1[i]);
        lo.u1[i] = mid;
        hi.u0[i] = mid;
    }
    [lo, hi]
}

/// `(upper bound, sampled max, evaluations)` for `max_{E_j} (Omega - shift)`.
fn annulus_max(omega: &NonRadialWeight, shift: f64, j: usize, opts: &AnnulusOptions) -> Result<(f64, f64, usize)> {
    let d = omega.dim();
    let (a, b) = annulus_radii(j);
    // equal spacing in radius and face coordinates
    let m = ((opts.initial_cells as f64 / (2 * d) as f64).powf(1.0 / d as f64).floor() as usize).max(1);
    let mut search = AnnulusSearch { omega, shift, evals: 0, best: f64::NEG_INFINITY };
    let mut heap = BinaryHeap::new();
    let mut idx = vec![0usize; d - 1];
    for axis in 0..d {
        for sign in [-1.0, 1.0] {
            idx.iter_mut().for_each(|v| *v = 0);
            loop {
                let u0: Vec<f64> = idx.iter().map(|&k| -1.0 + 2.0 * k as f64 / m as f64).collect();
                let u1: Vec<f64> = idx.iter().map(|&k| -1.0 + 2.0 * (k + 1) as f64 / m as f64).collect();
                for kr in 0..m {
                    let r0 = a + (b - a) * kr as f64 / m as f64;
                    let r1 = a + (b - a) * (kr + 1) as f64 / m as f64;
                    heap.push(search.score(Cell { r0, r1, axis, sign, u0: u0.clone(), u1: u1.clone() })?);
                }
                // odometer over the face grid
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < m {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
    }
    let floor_h = 1e-13 * b;
    while let Some(top) = heap.pop() {
        let tol = opts.rel_tol * search.best.abs().max(1.0);
        if top.upper <= search.best + tol || search.evals >= opts.max_evaluations {
            return Ok((top.upper.max(search.best), search.best, search.evals));
        }
        if top.h <= floor_h {
            // resolved to rounding: the center value is the cell's value
            search.best = search.best.max(top.upper);
            continue;
        }
        for child in split(&top.cell, top.widest) {
            heap.push(search.score(child)?);
        }
    }
    Ok((search.best, search.best, search.evals))
}

/// `lambda_j` for `j = 0..=j_max` after normalizing `Omega(0) = 0`.
pub fn annulus_maxima(omega: &NonRadialWeight, gamma: f64, opts: &AnnulusOptions) -> Result<AnnulusDecomposition> {
    let d = omega.dim();
    let origin = omega.log_weight(&vec![0.0; d]);
    if !origin.is_finite() {
        return Err(BmError::EvaluationFailed(format!("log-weight at the origin is {origin}")));
    }
    let per: Vec<(f64, f64, usize)> =
        (0..=opts.j_max).into_par_iter().map(|j| annulus_max(omega, origin, j, opts)).collect::<Result<_>>()?;
    Ok(AnnulusDecomposition {
        d,
        j_max: opts.j_max,
        lambdas: per.iter().map(|p| p.0.max(0.0)).collect(),
        sampled_max: per.iter().map(|p| p.1).collect(),
        gamma,
        origin_log_weight: origin,
        evaluations: per.iter().map(|p| p.2).sum(),
    })
}

/// Lipschitz envelope of the step function `lambda_j` on `E_j`.
#[derive(Debug, Clone)]
pub struct RadialMajorant {
    /// `Omega_1` as a radial weight profile.
    pub profile: WeightProfile,
    /// Interpolation nodes `(radius, value)`.
    pub nodes: Vec<(f64, f64)>,
    pub max_slope: f64,
    /// Constant added back so that `exp(-Omega_1) <= omega` holds unnormalized.
    pub shift: f64,
}

impl RadialMajorant {
    pub fn eval(&self, r: f64) -> f64 {
        self.profile.log_weight(r)
    }
}

fn interpolate(nodes: &[(f64, f64)], tail_slope: f64, r: f64) -> f64 {
    let last = nodes[nodes.len() - 1];
    if r >= last.0 {
        return last.1 + tail_slope * (r - last.0);
    }
    let k = nodes.partition_point(|n| n.0 <= r).max(1) - 1;
    let (r0, v0) = nodes[k];
    let (r1, v1) = nodes[k + 1];
    v0 + (v1 - v0) * (r - r0) / (r1 - r0)
}

/// Nodes at `0` and at every sphere `2^k` bounding two annuli, with the larger
/// of the two adjacent maxima, then linear interpolation. The result is at least
/// `lambda_j` on each `E_j` and continuous; it reduces to interpolating
/// `lambda_j` at `2^j` when the maxima increase.
pub fn build_radial_majorant(decomp: &AnnulusDecomposition) -> Result<RadialMajorant> {
    let lam = &decomp.lambdas;
    let j_max = lam.len() - 1;
    let mut nodes = vec![(0.0, lam[0])];
    for k in 1..=j_max + 1 {
        let outer = lam[k - 1];
        let inner = if k <= j_max { lam[k] } else { 0.0 };
        nodes.push((2f64.powi(k as i32), outer.max(inner)));
    }
    let slopes: Vec<f64> = nodes.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let max_slope = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let tail_slope = slopes.last().copied().unwrap_or(0.0).max(0.0);
    let shift = decomp.origin_log_weight.max(0.0);

    let mut grid = preset_grid(DEFAULT_R_MAX);
    grid.extend(nodes.iter().map(|n| n.0).filter(|&r| r <= DEFAULT_R_MAX));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let closure_nodes = nodes.clone();
    let profile = WeightProfile::from_log_fn(grid, "radial_majorant", move |r| {
        shift + interpolate(&closure_nodes, tail_slope, r)
    })?
    .with_dimension(decomp.d);
    Ok(RadialMajorant { profile, nodes, max_slope, shift })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub d: usize,
    pub gamma: f64,
    /// `S_2 = sum lambda_j 2^{-j}`.
    pub lhs_sum: f64,
    /// `S_1 = sum 2^{-j gamma} lambda_j^{d+1}`.
    pub rhs_sum: f64,
    pub beta: f64,
    /// Hoelder conjugate constant `(sum_j 2^{-j (1 - beta)(d+1)/d})^{d/(d+1)}`.
    pub k_const: f64,
    /// `K S_1^{1/(d+1)}`.
    pub bound: f64,
    /// Geometric extrapolation of the terms past `j_max`.
    pub rhs_tail: f64,
    pub lhs_tail: f64,
    /// Term ratio over the last quarter of the sums.
    pub rhs_ratio: f64,
    pub lhs_ratio: f64,
    pub diverged: bool,
    pub holds: bool,
}

impl HolderReport {
    pub fn to_text(&self) -> String {
        format!(
            "dimension = {}\ngamma = {}\nbeta = {:.12e}\nrhs_sum = {:.12e}\nrhs_tail = {:.6e}\nrhs_ratio = {:.6e}\n\
             lhs_sum = {:.12e}\nlhs_tail = {:.6e}\nlhs_ratio = {:.6e}\nk_const = {:.12e}\nbound = {:.12e}\n\
             diverged = {}\nholds = {}\n",
            self.d,
            self.gamma,
            self.beta,
            self.rhs_sum,
            self.rhs_tail,
            self.rhs_ratio,
            self.lhs_sum,
            self.lhs_tail,
            self.lhs_ratio,
            self.k_const,
            self.bound,
            self.diverged,
            self.holds
        )
    }
}

/// `(sum_j 2^{-j (1-beta)(d+1)/d})^{d/(d+1)}`; infinite for `beta >= 1`.
pub fn holder_constant(beta: f64, d: usize) -> f64 {
    if !(beta < 1.0) {
        return f64::INFINITY;
    }
    let p = d as f64 + 1.0;
    let q = p / d as f64;
    (1.0 / (1.0 - 2f64.powf(-(1.0 - beta) * q))).powf(1.0 / q)
}

/// Partial sum, geometric tail estimate and the term ratio over the last quarter.
fn series(terms: &[f64]) -> (f64, f64, f64) {
    let sum: f64 = terms.iter().sum();
    let n = terms.len();
    let m = (n / 4).max(1).min(n - 1);
    let (last, prev) = (terms[n - 1], terms[n - 1 - m]);
    if !sum.is_finite() {
        return (sum, f64::INFINITY, f64::INFINITY);
    }
    if last == 0.0 {
        return (sum, 0.0, 0.0);
    }
    if prev == 0.0 {
        return (sum, f64::INFINITY, f64::INFINITY);
    }
    let ratio = (last / prev).powf(1.0 / m as f64);
    let tail = if ratio < 1.0 { last * ratio / (1.0 - ratio) } else { f64::INFINITY };
    (sum, tail, ratio)
}

pub fn verify_holder_chain(decomp: &AnnulusDecomposition) -> Result<HolderReport> {
    let d = decomp.d;
    let limit = d as f64 + 1.0;
    if !(decomp.gamma < limit) {
        return Err(BmError::GammaOutOfRange { gamma: decomp.gamma, limit });
    }
    let s1_terms: Vec<f64> = decomp
        .lambdas
        .iter()
        .enumerate()
        .map(|(j, &l)| 2f64.powf(-(j as f64) * decomp.gamma) * l.powi(d as i32 + 1))
        .collect();
    let s2_terms: Vec<f64> = decomp.lambdas.iter().enumerate().map(|(j, &l)| l * 2f64.powi(-(j as i32))).collect();
    let (rhs_sum, rhs_tail, rhs_ratio) = series(&s1_terms);
    let (lhs_sum, lhs_tail, lhs_ratio) = series(&s2_terms);
    let beta = decomp.gamma / limit;
    let k_const = holder_constant(beta, d);
    let bound = k_const * rhs_sum.powf(1.0 / limit);
    let diverged = !(rhs_ratio < 1.0) || !(lhs_ratio < 1.0);
    let holds = !diverged && bound.is_finite() && lhs_sum <= bound * (1.0 + 1e-12);
    Ok(HolderReport {
        d,
        gamma: decomp.gamma,
        lhs_sum,
        rhs_sum,
        beta,
        k_const,
        bound,
        rhs_tail,
        lhs_tail,
        rhs_ratio,
        lhs_ratio,
        diverged,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorizationAudit {
    pub samples: usize,
    /// `min (Omega_1(|x|) - Omega(x))` over the samples.
    pub worst_margin: f64,
    pub violations: usize,
}

impl MajorizationAudit {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Random points with log-uniform radius over `[2^-4, 2^{j_max+1}]` and
/// uniform direction.
pub fn audit_points(d: usize, j_max: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let dir = loop {
                let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n2: f64 = v.iter().map(|x| x * x).sum();
                if n2 > 1e-6 && n2 <= 1.0 {
                    break v.into_iter().map(|x| x / n2.sqrt()).collect::<Vec<f64>>();
                }
            };
            let r = 2f64.powf(rng.gen_range(-4.0..=(j_max as f64 + 1.0)));
            dir.into_iter().map(|x| x * r).collect()
        })
        .collect()
}

pub fn audit_majorant(omega: &NonRadialWeight, maj: &RadialMajorant, points: &[Vec<f64>]) -> MajorizationAudit {
    let margins: Vec<(f64, bool)> = points
        .par_iter()
        .map(|x| {
            let om = omega.log_weight(x);
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let m = maj.eval(r) - om;
            (m, m >= -AUDIT_TOL * om.abs().max(1.0))
        })
        .collect();
    MajorizationAudit {
        samples: points.len(),
        worst_margin: margins.iter().map(|m| m.0).fold(f64::INFINITY, f64::min),
        violations: margins.iter().filter(|m| !m.1).count(),
    }
}

#[derive(Debug, Clone)]
pub struct MajorizeOptions {
    pub annulus: AnnulusOptions,
    pub audit_samples: usize,
    pub seed: u64,
}

impl Default for MajorizeOptions {
    fn default() -> Self {
        Self { annulus: AnnulusOptions::default(), audit_samples: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub decomposition: AnnulusDecomposition,
    pub holder: HolderReport,
    pub majorant: RadialMajorant,
    pub audit: MajorizationAudit,
    pub admissibility: AdmissibilityReport,
}

impl Reduction {
    pub fn to_text(&self) -> String {
        let mut s = format!("weight_dimension = {}\norigin_log_weight = {:.12e}\n", self.decomposition.d, self.decomposition.origin_log_weight);
        s += &self.holder.to_text();
        s += &format!(
            "envelope_max_slope = {:.12e}\naudit_samples = {}\naudit_worst_margin = {:.6e}\naudit_violations = {}\n\
             admissibility_verdict = {}\nevaluations = {}\n",
            self.majorant.max_slope,
            self.audit.samples,
            self.audit.worst_margin,
            self.audit.violations,
            self.admissibility.verdict,
            self.decomposition.evaluations
        );
        for (j, (l, m)) in self.decomposition.lambdas.iter().zip(&self.decomposition.sampled_max).enumerate() {
            s += &format!("lambda_{j} = {l:.12e} (sampled {m:.12e})\n");
        }
        s
    }
}

/// Annulus maxima, Hoelder chain, envelope and audit. Refuses `gamma >= d + 1`
/// and chains whose sums do not converge.
pub fn reduce_nonradial(omega: &NonRadialWeight, gamma: f64, sigma: f64, opts: &MajorizeOptions) -> Result<Reduction> {
    let d = omega.dim();
    let limit = d as f64 + 1.0;
    if !(gamma < limit) {
        return Err(BmError::GammaOutOfRange { gamma, limit });
    }
    let decomposition = annulus_maxima(omega, gamma, &opts.annulus)?;
    let holder = verify_holder_chain(&decomposition)?;
    if holder.diverged {
        return Err(BmError::HolderChainDiverged(format!(
            "term ratios {:.4} (S_1) and {:.4} (S_2) over the last annuli",
            holder.rhs_ratio, holder.lhs_ratio
        )));
    }
    let majorant = build_radial_majorant(&decomposition)?;
    let points = audit_points(d, opts.annulus.j_max, opts.audit_samples, opts.seed);
    let audit = audit_majorant(omega, &majorant, &points);
    let admissibility = admissibility_check(&majorant.profile, sigma)?;
    Ok(Reduction { decomposition, holder, majorant, audit, admissibility })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quick() -> AnnulusOptions {
        AnnulusOptions { j_max: 12, initial_cells: 256, ..Default::default() }
    }

    fn decomp(d: usize, gamma: f64, lambdas: Vec<f64>) -> AnnulusDecomposition {
        let n = lambdas.len();
        AnnulusDecomposition {
            d,
            j_max: n - 1,
            sampled_max: lambdas.clone(),
            lambdas,
            gamma,
            origin_log_weight: 0.0,
            evaluations: 0,
        }
    }

    #[test]
    fn zero_weight_has_zero_maxima() {
        let w = NonRadialWeight::from_expression("1", 3).unwrap();
        let dec = annulus_maxima(&w, 2.0, &quick()).unwrap();
        assert!(dec.lambdas.iter().all(|&l| l == 0.0));
        let maj = build_radial_majorant(&dec).unwrap();
        assert!([0.0, 1.0, 7.5, 1e5].iter().all(|&r| maj.eval(r) == 0.0));
    }

    #[test]
    fn sqrt_norm_and_coordinate_maxima() {
        let w = NonRadialWeight::from_expression("exp(-sqrt(norm(x)))", 2).unwrap();
        let dec = annulus_maxima(&w, 2.5, &quick()).unwrap();
        for (j, &l) in dec.lambdas.iter().enumerate() {
            let exact = 2f64.powf((j as f64 + 1.0) / 2.0);
            assert!(l >= exact && l <= exact * (1.0 + 1e-6), "j={j}: {l} vs {exact}");
        }
        let w = NonRadialWeight::from_expression("exp(-abs(x1))", 2).unwrap();
        let dec = annulus_maxima(&w, 2.5, &quick()).unwrap();
        for (j, &l) in dec.lambdas.iter().enumerate() {
            let exact = 2f64.powi(j as i32 + 1);
            assert!(l >= exact && l <= exact * (1.0 + 1e-6), "j={j}: {l} vs {exact}");
        }
    }

    #[test]
    fn origin_is_normalized() {
        let w = NonRadialWeight::from_expression("exp(-3 - abs(x2))", 2).unwrap();
        let dec = annulus_maxima(&w, 2.0, &quick()).unwrap();
        assert_eq!(dec.origin_log_weight, 3.0);
        assert!((dec.lambdas[0] - 2.0).abs() < 1e-6);
        // the shift comes back so exp(-Omega_1) <= omega without normalization
        let maj = build_radial_majorant(&dec).unwrap();
        assert!((maj.eval(0.0) - 5.0).abs() < 1e-6);
    }

    #[test]
    fn envelope_examples() {
        let lam: Vec<f64> = (0..=20).map(|j| 2f64.powf((j as f64 + 1.0) / 2.0)).collect();
        let maj = build_radial_majorant(&decomp(2, 2.5, lam.clone())).unwrap();
        for k in 0..4000 {
            let r = 2f64.powf(-3.0 + 24.0 * k as f64 / 4000.0);
            let v = maj.eval(r);
            assert!(v <= 2.0 * r.sqrt() + 2.0, "r={r}");
            // >= the step function on its annulus
            let j = if r <= 2.0 { 0 } else { (r.log2().ceil() as usize - 1).min(20) };
            if r <= 2f64.powi(21) {
                assert!(v >= lam[j] - 1e-12, "r={r}");
            }
        }
        // a single bump is a plateau on E_0 falling to zero by radius 4
        let mut single = vec![0.0; 10];
        single[0] = 1.5;
        let maj = build_radial_majorant(&decomp(3, 2.0, single)).unwrap();
        assert_eq!(maj.eval(0.0), 1.5);
        assert_eq!(maj.eval(2.0), 1.5);
        assert!((maj.eval(3.0) - 0.75).abs() < 1e-12);
        assert_eq!(maj.eval(4.0), 0.0);
        assert_eq!(maj.eval(100.0), 0.0);
        assert!((maj.max_slope - 0.75).abs() < 1e-12);
    }

    #[test]
    fn radial_weight_envelope_stays_within_two_shells() {
        let p = WeightProfile::preset("exp_sqrt", 1e8).unwrap();
        let om = |r: f64| (1.0 + r).sqrt() - 1.0;
        let w = NonRadialWeight::from_radial(p, 3);
        let dec = annulus_maxima(&w, 3.0, &quick()).unwrap();
        let maj = build_radial_majorant(&dec).unwrap();
        for k in 1..2000 {
            let r = 2f64.powf(-2.0 + 14.0 * k as f64 / 2000.0);
            let lo = if r <= 2.0 { 0.0 } else { 2f64.powf(r.log2().floor()) };
            let v = maj.eval(r);
            assert!(v >= om(r) - 1e-12, "r={r}");
            assert!(v - om(r) <= om(4.0 * lo.max(1.0)) - om(lo) + 1e-9, "r={r}");
        }
    }

    #[test]
    fn holder_chain_fixture() {
        let lam: Vec<f64> = (0..=DEFAULT_J_MAX).map(|j| 2f64.powf((j as f64 + 1.0) / 2.0)).collect();
        let rep = verify_holder_chain(&decomp(2, 2.5, lam)).unwrap();
        assert!((rep.rhs_sum - 4.0 * 2f64.sqrt()).abs() < 1e-9, "{}", rep.rhs_sum);
        // truncated at j = 40; the ratio 2^{-1/2} leaves a visible tail
        let q = 0.5f64.sqrt();
        let s2 = 2f64.sqrt() * (1.0 - q.powi(41)) / (1.0 - q);
        assert!((rep.lhs_sum - s2).abs() < 1e-9);
        assert!((rep.lhs_sum + rep.lhs_tail - 2f64.sqrt() / (1.0 - q)).abs() < 1e-9);
        assert!(rep.holds && !rep.diverged);
        assert!((rep.rhs_ratio - 0.5).abs() < 1e-12);

        let zero = verify_holder_chain(&decomp(2, 2.5, vec![0.0; 41])).unwrap();
        assert_eq!((zero.rhs_sum, zero.lhs_sum), (0.0, 0.0));
        assert!(zero.holds);

        let wild: Vec<f64> = (0..=40).map(|j| 2f64.powi(j) * j as f64).collect();
        let rep = verify_holder_chain(&decomp(3, 3.0, wild)).unwrap();
        assert!(rep.diverged && !rep.holds);

        assert!(matches!(
            verify_holder_chain(&decomp(2, 3.0, vec![1.0; 5])),
            Err(BmError::GammaOutOfRange { .. })
        ));
    }

    #[test]
    fn holder_constant_breaks_at_beta_one() {
        assert!(holder_constant(0.5, 2).is_finite());
        assert!(holder_constant(1.0, 2).is_infinite());
        assert!(holder_constant(1.2, 2).is_infinite());
        // as beta -> 1 the constant blows up
        assert!(holder_constant(1.0 - 1e-6, 2) > 1e3);
    }

    #[test]
    fn reduction_refuses_gamma_and_linear_growth() {
        let w = NonRadialWeight::from_expression("exp(-norm(x))", 2).unwrap();
        let opts = MajorizeOptions { annulus: quick(), audit_samples: 100, seed: 1 };
        assert!(matches!(reduce_nonradial(&w, 3.0, 0.05, &opts), Err(BmError::GammaOutOfRange { .. })));
        assert!(matches!(reduce_nonradial(&w, 2.5, 0.05, &opts), Err(BmError::HolderChainDiverged(_))));
        assert!(matches!(reduce_nonradial(&w, 2.0, 0.05, &opts), Err(BmError::HolderChainDiverged(_))));
    }

    #[test]
    fn bad_weight_fails_evaluation() {
        let w = NonRadialWeight::from_expression("log(x1)", 2).unwrap();
        assert!(matches!(annulus_maxima(&w, 1.0, &quick()), Err(BmError::EvaluationFailed(_))));
        assert!(matches!(NonRadialWeight::from_expression("x3", 2), Err(BmError::Parse(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn maxima_bound_and_cap_for_linear_weights(a in 0.0f64..2.0, b in 0.0f64..2.0, d in 2usize..4) {
            let w = NonRadialWeight::from_expression(&format!("exp(-{a}*abs(x1) - {b}*abs(x2))"), d).unwrap();
            let opts = AnnulusOptions { j_max: 6, initial_cells: 128, ..Default::default() };
            let dec = annulus_maxima(&w, 1.0, &opts).unwrap();
            let lip = (a * a + b * b).sqrt();
            for (j, &l) in dec.lambdas.iter().enumerate() {
                let outer = 2f64.powi(j as i32 + 1);
                // max over the sphere of a|y1| + b|y2| is |(a, b)| times the radius
                prop_assert!(l >= lip * outer * (1.0 - 1e-12));
                prop_assert!(l <= lip * outer * (1.0 + 1e-6) + 1e-7);
                prop_assert!(l >= dec.sampled_max[j]);
            }
        }
    }
}
