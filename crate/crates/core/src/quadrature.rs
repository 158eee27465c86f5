//! Quadrature rules shared by the transform modules.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{BmError, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 20-point rule.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(20))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        self.mapped(a, b).map(|(x, w)| f(x) * w).sum()
    }

    /// Composite rule over `panels` equal panels.
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| self.integrate(a + k as f64 * h, a + (k + 1) as f64 * h, &mut f))
            .sum()
    }

    /// All nodes and weights of the composite rule over the given breakpoints.
    pub fn composite_nodes(&self, breaks: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::with_capacity(breaks.len() * self.len());
        let mut ws = Vec::with_capacity(breaks.len() * self.len());
        for w in breaks.windows(2) {
            for (x, wt) in self.mapped(w[0], w[1]) {
                xs.push(x);
                ws.push(wt);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

/// Tanh–sinh rule on `[a, b]`. The integrand receives the abscissa together
/// with its distance to the nearer endpoint, computed without cancellation.
pub fn tanh_sinh<F: FnMut(f64, f64) -> f64>(a: f64, b: f64, level: u32, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let h = 1.0 / f64::from(1u32 << level);
    let t_max = 4.5;
    let n = (t_max / h).ceil() as i64;
    let mut sum = 0.0;
    for k in -n..=n {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let cosh_u = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        // distance to the nearer endpoint: half * (1 - tanh|u|)
        let dist = half * 2.0 / (1.0 + (2.0 * u.abs()).exp());
        if dist <= 0.0 {
            continue;
        }
        let x = if u < 0.0 { a + dist } else if u > 0.0 { b - dist } else { mid };
        sum += w * f(x, dist);
    }
    sum * half * h
}

/// Parameters of the averaged-truncation rule for conditionally convergent
/// oscillatory integrals over `[start, inf)`.
#[derive(Debug, Clone, Copy)]
pub struct ImproperRule {
    /// Half period of the oscillation; partial sums are taken at multiples of it.
    pub half_period: f64,
    /// Initial number of half-period panels.
    pub initial_panels: usize,
    /// Hard cap on panels before giving up.
    pub max_panels: usize,
    /// Number of pairwise averaging passes over the partial sums.
    pub averaging_levels: usize,
    pub tol: f64,
}

impl ImproperRule {
    pub fn new(half_period: f64) -> Self {
        Self {
            half_period,
            initial_panels: 64,
            max_panels: 1 << 14,
            averaging_levels: 10,
            tol: 1e-12,
        }
    }
}

/// Integral over `[start, inf)` as the limit of truncations at
/// `start + k * half_period`, accelerated by repeatedly averaging neighbouring
/// partial sums (the truncations at `R` and `R + half_period` straddle the
/// limit for oscillatory tails).
pub fn improper_averaged<F: FnMut(f64) -> f64>(start: f64, rule: ImproperRule, mut f: F) -> Result<f64> {
    let gl = GaussLegendre::standard();
    let hp = rule.half_period;
    if !(hp > 0.0) {
        return Err(BmError::InvalidParameter("half period must be positive".into()));
    }
    let mut partial: Vec<f64> = Vec::new();
    let mut acc = 0.0;
    let mut panels = rule.initial_panels.max(rule.averaging_levels + 4);
    let mut previous: Option<f64> = None;
    loop {
        while partial.len() < panels {
            let k = partial.len();
            let a = start + k as f64 * hp;
            acc += gl.integrate(a, a + hp, &mut f);
            partial.push(acc);
        }
        let estimate = averaged_limit(&partial, rule.averaging_levels);
        let half_estimate = averaged_limit(&partial[..panels / 2 + 1], rule.averaging_levels);
        let scale = estimate.abs().max(1e-300);
        let diff = (estimate - half_estimate).abs();
        if diff <= rule.tol * scale.max(1.0) || previous.is_some_and(|p| (p - estimate).abs() <= rule.tol * scale.max(1.0)) {
            return Ok(estimate);
        }
        previous = Some(estimate);
        if panels >= rule.max_panels {
            return Err(BmError::TailNotConverged(format!(
                "averaged truncations still moving by {diff:.3e} after {panels} half periods"
            )));
        }
        panels = (panels * 2).min(rule.max_panels);
    }
}

/// Repeated pairwise averaging of the last partial sums.
pub fn averaged_limit(partial: &[f64], levels: usize) -> f64 {
    let take = (levels + 1).min(partial.len());
    let mut tail: Vec<f64> = partial[partial.len() - take..].to_vec();
    while tail.len() > 1 {
        tail = tail.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    tail[0]
}

/// Composite Simpson weights on an arbitrary increasing grid (pairs of
/// intervals; a lone last interval uses the quadratic through its left
/// neighbours). Pairs with very unequal steps fall back to the trapezoid.
pub fn simpson_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    let trapezoid = |w: &mut [f64], i: usize| {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    };
    let mut i = 0;
    while i + 2 < n {
        let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
        let q = h1 / h0;
        if (0.125..=8.0).contains(&q) {
            let s = (h0 + h1) / 6.0;
            w[i] += s * (2.0 - q);
            w[i + 1] += s * (h0 + h1) * (h0 + h1) / (h0 * h1);
            w[i + 2] += s * (2.0 - 1.0 / q);
        } else {
            trapezoid(&mut w, i);
            trapezoid(&mut w, i + 1);
        }
        i += 2;
    }
    if i + 1 < n {
        if i >= 1 {
            let (a, b) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            if (0.125..=8.0).contains(&(b / a)) {
                w[i - 1] -= b * b * b / (6.0 * a * (a + b));
                w[i] += b * (b + 3.0 * a) / (6.0 * a);
                w[i + 1] += b * (2.0 * b + 3.0 * a) / (6.0 * (a + b));
                return w;
            }
        }
        trapezoid(&mut w, i);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(10);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(19));
        assert!((v - 2f64.powi(20) / 20.0).abs() < 1e-9 * v);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let v = tanh_sinh(0.0, 1.0, 6, |x, _| 1.0 / x.sqrt());
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        // near 0 the distance argument is the abscissa itself, without rounding
        let w = tanh_sinh(0.0, 1.0, 6, |x, d| if x < 0.5 { d } else { x }.powf(-0.75));
        let exact = 4.0;
        assert!((w - exact).abs() < 1e-8, "{w} vs {exact}");
    }

    #[test]
    fn dirichlet_integral_by_averaged_truncation() {
        // int_1^inf sin(x)/x dx = pi/2 - Si(1)
        let si1 = GaussLegendre::standard().integrate(0.0, 1.0, |x| if x == 0.0 { 1.0 } else { x.sin() / x });
        let v = improper_averaged(1.0, ImproperRule::new(PI), |x| x.sin() / x).unwrap();
        assert!((v - (FRAC_PI_2 - si1)).abs() < 1e-10, "{v}");
    }

    #[test]
    fn divergent_tail_is_reported() {
        let mut rule = ImproperRule::new(1.0);
        rule.max_panels = 256;
        assert!(matches!(
            improper_averaged(0.0, rule, |x| x),
            Err(BmError::TailNotConverged(_))
        ));
    }

    #[test]
    fn simpson_weights_are_exact_for_quadratics() {
        for n in [5usize, 6, 41, 42] {
            // graded grid, both parities of the interval count
            let x: Vec<f64> = (0..n).map(|k| (k as f64 / (n - 1) as f64).powf(1.3) * 3.0).collect();
            let w = simpson_weights(&x);
            let v: f64 = x.iter().zip(&w).map(|(&t, &w)| w * (t * t - 2.0 * t + 1.0)).sum();
            let exact = 3.0;
            assert!((v - exact).abs() < 1e-12, "{n}: {v}");
        }
        let w = simpson_weights(&[0.0, 1.0]);
        assert_eq!(w, vec![0.5, 0.5]);
        // fourth order on a smooth integrand
        let err = |n: usize| {
            let x: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
            let w = simpson_weights(&x);
            (x.iter().zip(&w).map(|(&t, &w)| w * t.exp()).sum::<f64>() - (1f64.exp() - 1.0)).abs()
        };
        assert!(err(20) / err(40) > 14.0);
    }
}
