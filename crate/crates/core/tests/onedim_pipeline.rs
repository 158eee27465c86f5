use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use bmforge::onedim_bm::{
    construct_bandlimited_1d, cosine_transform, deflate_origin_zero, deflation_radius, lemma1_g, symmetrize,
    BandlimitedCandidate, ConstructOptions, LemmaG,
};
use bmforge::weights::WeightProfile;
use num_complex::Complex64;

const SIGMA: f64 = 0.05;

fn exp_sqrt() -> WeightProfile {
    WeightProfile::preset("exp_sqrt", 1e8).unwrap()
}

fn pipeline() -> &'static LemmaG {
    static G: OnceLock<LemmaG> = OnceLock::new();
    G.get_or_init(|| {
        let t = Instant::now();
        let g = lemma1_g(&exp_sqrt(), SIGMA, &ConstructOptions::default()).unwrap();
        eprintln!("pipeline built in {:.2?}: {:?} / {:?}", t.elapsed(), g.candidate, g);
        g
    })
}

fn candidate() -> &'static BandlimitedCandidate {
    &pipeline().candidate
}

#[test]
fn exp_sqrt_candidate_is_band_limited_and_majorized() {
    let c = candidate();
    assert!(c.leakage <= 1e-4, "leakage {}", c.leakage);
    assert!(c.majorization_ratio <= 1.0 + 1e-9, "{}", c.majorization_ratio);
    assert!(c.l2_norm > 0.0);
}

#[test]
fn symmetrized_candidate() {
    let s = &pipeline().symmetrized;
    let c = candidate();
    assert!((s.origin_value - c.origin_value * 2.0).norm() < 1e-12 * c.origin_value.norm());
    assert!(s.origin_value.norm() > 0.0);
    assert!(s.leakage <= 1e-4, "{}", s.leakage);
    assert!(s.majorization_ratio <= 1.0 + 1e-9);
    for &x in &[0.3, 7.0, 120.0] {
        assert!((s.eval(x) - s.eval(-x)).norm() <= 1e-12 * s.eval(x).norm().max(1e-300));
    }
}

#[test]
fn lemma_g_properties() {
    let g = pipeline();
    assert!(g.origin > 0.0);
    assert!(g.majorization_ratio <= 1.0 + 1e-9, "{}", g.majorization_ratio);
    eprintln!("C(sigma) measured: {:.6e}", g.c_measured);
}

#[test]
fn fourier_transform_equals_four_cosine_transform() {
    let g = pipeline();
    let s = &g.symmetrized;
    let h = s.spacing();
    let ts = [0.0, 0.01, 0.02, 0.03, 0.045];
    let ys: Vec<f64> = ts.iter().map(|t| 2.0 * PI * t).collect();
    let tg = cosine_transform(&g.samples, &ys).unwrap();
    for (k, &t) in ts.iter().enumerate() {
        // trapezoid sum of f_sym against e^{-2 pi i t x} over the symmetric part of the grid
        let (x, v) = (s.samples.grid(), s.samples.values());
        let last = x.len() - 1;
        let ft: Complex64 = (1..=last)
            .map(|j| {
                let w = if j == 1 || j == last { 0.5 * h } else { h };
                v[j] * Complex64::from_polar(w, -2.0 * PI * t * x[j])
            })
            .sum();
        let four_tg = tg.values()[k] * 4.0;
        let rel = (ft - four_tg).norm() / four_tg.norm();
        assert!(rel < 1e-6, "t = {t}: {ft} vs {four_tg} ({rel:e})");
    }
}

#[test]
fn deflation_of_synthetic_double_zero() {
    let c = candidate();
    let eps = 0.001;
    let n = 2;
    // ((1 - e^{2 pi i eps x}) / 2)^N = (-i e^{i pi eps x} sin(pi eps x))^N
    let synth = c
        .multiply(move |x: f64| {
            let one = Complex64::new(0.0, -1.0) * Complex64::from_polar((PI * eps * x).sin(), PI * eps * x);
            one.powi(n)
        })
        .unwrap();
    let rho = deflation_radius(&synth);
    let d = deflate_origin_zero(&synth, rho).unwrap();
    eprintln!("rho = {rho}, {:?}, case {:?}, leak in {:e} out {:e}", d.order, d.case, synth.leakage, d.candidate.leakage);
    assert_eq!(d.order, 2);
    assert!(d.candidate.majorization_ratio <= 1.0 + 1e-9, "{}", d.candidate.majorization_ratio);
    assert!(d.candidate.origin_value.norm() > 0.0);
    assert!(d.candidate.leakage <= 10.0 * synth.leakage.max(1e-300), "{} vs {}", d.candidate.leakage, synth.leakage);
    // f_0(0) = f^{(2)}(0)/2 = f(0) (-i pi eps)^2
    let want = c.origin_value * Complex64::new(0.0, -PI * eps).powi(2);
    assert!((d.f0_origin - want).norm() < 1e-6 * want.norm(), "{} vs {want}", d.f0_origin);
}

#[test]
fn divergent_weight_rejected() {
    let phi = WeightProfile::preset("exp_abs", 1e8).unwrap();
    assert!(construct_bandlimited_1d(&phi, SIGMA, &ConstructOptions::default()).is_err());
}

#[test]
fn symmetrize_helper_is_consistent() {
    let c = candidate();
    let s = symmetrize(c).unwrap();
    assert_eq!(s.samples.values(), pipeline().symmetrized.samples.values());
}
