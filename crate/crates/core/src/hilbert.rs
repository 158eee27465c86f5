//! Hilbert transform on the line (Poisson-compensated kernel) and the
//! half-line transform `H_+`.
//!
//! Both are computed by exact product integration of the kernels against the
//! piecewise-linear interpolant of the samples, so the principal value needs
//! no special cell: the logarithmic terms of the two segments meeting at a
//! node cancel analytically.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{BmError, Result};
use crate::sampled::{SampledFunction, Symmetry};

/// Ceiling for the dP-weighted size of the samples at the ends of the grid,
/// relative to `max(1, int |f| dP)`.
pub const TAIL_TOLERANCE: f64 = 1e-2;

/// One linear piece `f(t) = v + s (t - a)` on `[a, b]`.
#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    v: Complex64,
    s: Complex64,
}

fn segments(grid: &[f64], values: &[Complex64]) -> Vec<Segment> {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| Segment { a: g[0], b: g[1], v: v[0], s: (v[1] - v[0]) / (g[1] - g[0]) })
        .collect()
}

fn full_line_segments(f: &SampledFunction) -> Vec<Segment> {
    let full = f.to_full_line();
    segments(full.grid(), full.values())
}

/// `PV int f(t) / (x - t) dt` over the segments, real `x`.
fn cauchy_pv(segs: &[Segment], x: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for sg in segs {
        // value of the linear extension at x
        let at_x = sg.v + sg.s * (x - sg.a);
        let (da, db) = ((x - sg.a).abs(), (x - sg.b).abs());
        let logs = match (da == 0.0, db == 0.0) {
            // the matching log term of the neighbouring segment cancels it
            (true, _) => -db.ln(),
            (_, true) => da.ln(),
            _ => da.ln() - db.ln(),
        };
        acc += at_x * logs - sg.s * (sg.b - sg.a);
    }
    acc
}

/// `int f(t) / (z - t) dt` for `Im z > 0`.
fn cauchy_complex(segs: &[Segment], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut log_a = match segs.first() {
        Some(sg) => (z - sg.a).ln(),
        None => return acc,
    };
    for sg in segs {
        // segments are contiguous, so each node's logarithm is computed once
        let log_b = (z - sg.b).ln();
        let at_z = sg.v + sg.s * (z - sg.a);
        acc += at_z * (log_a - log_b) - sg.s * (sg.b - sg.a);
        log_a = log_b;
    }
    acc
}

/// `int f(t) t / (1 + t^2) dt`, the Poisson compensation.
fn compensation(segs: &[Segment]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for sg in segs {
        let alpha = sg.v - sg.s * sg.a;
        let log_part = 0.5 * ((1.0 + sg.b * sg.b).ln() - (1.0 + sg.a * sg.a).ln());
        let lin_part = (sg.b - sg.a) - (sg.b.atan() - sg.a.atan());
        acc += alpha * log_part + sg.s * lin_part;
    }
    acc
}

/// `int |f| / (1 + t^2) dt` of the interpolant (trapezoid on `|f|`).
fn poisson_mass(f: &SampledFunction) -> f64 {
    let full = f.to_full_line();
    full.grid()
        .windows(2)
        .zip(full.values().windows(2))
        .map(|(g, v)| {
            let w0 = v[0].norm() / (1.0 + g[0] * g[0]);
            let w1 = v[1].norm() / (1.0 + g[1] * g[1]);
            0.5 * (w0 + w1) * (g[1] - g[0])
        })
        .sum()
}

/// Rejects samples whose ends still carry dP-mass, i.e. where truncating the
/// integral to the stored extent is not justified.
pub fn check_tail(f: &SampledFunction) -> Result<()> {
    let full = f.to_full_line();
    let (g, v) = (full.grid(), full.values());
    let end_weight = |k: usize| v[k].norm() * g[k].abs() / (1.0 + g[k] * g[k]);
    let tail = end_weight(0).max(end_weight(g.len() - 1));
    let scale = poisson_mass(f).max(1.0);
    if !(tail <= TAIL_TOLERANCE * scale) {
        return Err(BmError::TailNotIntegrable(format!(
            "end samples carry weighted size {tail:.3e} against total {scale:.3e}"
        )));
    }
    Ok(())
}

/// Precomputed line transform of one sampled function, evaluable anywhere.
#[derive(Debug, Clone)]
pub struct LineHilbert {
    segs: Vec<Segment>,
    comp: Complex64,
}

impl LineHilbert {
    pub fn new(f: &SampledFunction) -> Result<Self> {
        if f.len() < 2 {
            return Err(BmError::GridTooShort("need at least two samples".into()));
        }
        check_tail(f)?;
        let segs = full_line_segments(f);
        let comp = compensation(&segs);
        Ok(Self { segs, comp })
    }

    /// `Hf(x) = (1/pi) PV int (1/(x - t) + t/(1 + t^2)) f(t) dt`.
    pub fn eval(&self, x: f64) -> Complex64 {
        (cauchy_pv(&self.segs, x) + self.comp) / PI
    }

    /// Analytic extension `Phi(z) = (i/pi) int (1/(z - t) + t/(1 + t^2)) f(t) dt`
    /// for `Im z > 0`; for real `f` its boundary values are `f + i Hf`.
    pub fn lift(&self, z: Complex64) -> Complex64 {
        Complex64::new(0.0, 1.0 / PI) * (cauchy_complex(&self.segs, z) + self.comp)
    }
}

/// Hilbert transform on the line, sampled at the grid of `f` (full-line
/// grid for symmetric inputs).
pub fn hilbert_line(f: &SampledFunction) -> Result<SampledFunction> {
    let h = LineHilbert::new(f)?;
    let xs: Vec<f64> = f.to_full_line().grid().to_vec();
    let values: Vec<Complex64> = xs.par_iter().map(|&x| h.eval(x)).collect();
    SampledFunction::new(xs, values, Symmetry::None)
}

/// Line transform at arbitrary abscissae.
pub fn hilbert_line_at(f: &SampledFunction, xs: &[f64]) -> Result<Vec<Complex64>> {
    let h = LineHilbert::new(f)?;
    Ok(xs.par_iter().map(|&x| h.eval(x)).collect())
}

/// Precomputed half-line transform.
#[derive(Debug, Clone)]
pub struct HalfLineHilbert {
    segs: Vec<Segment>,
}

impl HalfLineHilbert {
    pub fn new(f: &SampledFunction) -> Result<Self> {
        if f.len() < 2 {
            return Err(BmError::GridTooShort("need at least two samples".into()));
        }
        let half = if f.symmetry() == Symmetry::None { f.restrict_half_line(Symmetry::Even)? } else { f.clone() };
        check_tail(&half)?;
        Ok(Self { segs: segments(half.grid(), half.values()) })
    }

    /// `H_+ f(x) = (1/pi) PV int_0^inf 2x f(t) / (x^2 - t^2) dt`.
    pub fn eval(&self, x: f64) -> Complex64 {
        // 2x/(x^2 - t^2) = 1/(x - t) + 1/(x + t)
        (cauchy_pv(&self.segs, x) - cauchy_pv(&self.segs, -x)) / PI
    }
}

/// Half-line transform sampled at the (nonnegative part of the) grid of `f`.
pub fn hilbert_halfline(f: &SampledFunction) -> Result<SampledFunction> {
    let h = HalfLineHilbert::new(f)?;
    let xs: Vec<f64> = f.grid().iter().copied().filter(|&x| x >= 0.0).collect();
    let values: Vec<Complex64> = xs.par_iter().map(|&x| h.eval(x)).collect();
    SampledFunction::new(xs, values, Symmetry::Odd)
}

pub fn hilbert_halfline_at(f: &SampledFunction, xs: &[f64]) -> Result<Vec<Complex64>> {
    let h = HalfLineHilbert::new(f)?;
    Ok(xs.par_iter().map(|&x| h.eval(x)).collect())
}

/// `sup |Hf(x) - H_+(f|R+)(x)|` over the nonnegative grid points of `f`,
/// after aligning both at the first audit point.
pub fn check_even_consistency(f_even: &SampledFunction) -> Result<f64> {
    if f_even.symmetry() != Symmetry::Even {
        return Err(BmError::SymmetryViolated("even consistency needs an even-tagged input".into()));
    }
    let line = LineHilbert::new(f_even)?;
    let half = HalfLineHilbert::new(f_even)?;
    let xs = f_even.grid();
    let diffs: Vec<Complex64> = xs.par_iter().map(|&x| line.eval(x) - half.eval(x)).collect();
    let anchor = diffs[0];
    Ok(diffs.iter().map(|d| (d - anchor).norm()).fold(0.0, f64::max))
}

/// Largest centered difference quotient over interior grid points.
pub fn deriv_sup(g: &SampledFunction) -> Result<f64> {
    let (xs, vs) = (g.grid(), g.values());
    if xs.len() < 3 {
        return Err(BmError::GridTooShort("centered differences need three samples".into()));
    }
    Ok((1..xs.len() - 1)
        .map(|k| ((vs[k + 1] - vs[k - 1]) / (xs[k + 1] - xs[k - 1])).norm())
        .fold(0.0, f64::max))
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::sampled::uniform_grid;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn linearity(a in -3.0f64..3.0, b in -3.0f64..3.0, x in -20.0f64..20.0) {
            let grid = uniform_grid(-200.0, 200.0, 4001);
            let f = |t: f64| (-t * t / 10.0).exp();
            let g = |t: f64| 1.0 / (1.0 + (t - 1.0).powi(2));
            let sf = SampledFunction::from_real_fn(grid.clone(), Symmetry::None, f).unwrap();
            let sg = SampledFunction::from_real_fn(grid.clone(), Symmetry::None, g).unwrap();
            let sc = SampledFunction::from_real_fn(grid, Symmetry::None, |t| a * f(t) + b * g(t)).unwrap();
            let lhs = hilbert_line_at(&sc, &[x]).unwrap()[0];
            let rhs = hilbert_line_at(&sf, &[x]).unwrap()[0] * a + hilbert_line_at(&sg, &[x]).unwrap()[0] * b;
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }
    }
}
