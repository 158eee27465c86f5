//! Discrete Fourier oracle for functions sampled on a centered uniform line
//! grid, in cyclic frequency units (`e^{-2 pi i xi x}`).

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{BmError, Result};

#[derive(Debug, Clone)]
pub struct LineSpectrum {
    /// Frequencies in cycles per unit, FFT order.
    pub freqs: Vec<f64>,
    /// `|f_hat|^2` per bin (unnormalized).
    pub energy: Vec<f64>,
}

impl LineSpectrum {
    /// Samples `values` at spacing `h` (any start point; only moduli are kept).
    pub fn new(values: &[Complex64], h: f64) -> Result<Self> {
        let n = values.len();
        if n < 2 || !(h > 0.0) {
            return Err(BmError::GridTooShort("spectrum needs at least two samples".into()));
        }
        let mut buf = values.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let freqs = (0..n)
            .map(|k| {
                let k = if k <= (n - 1) / 2 { k as f64 } else { k as f64 - n as f64 };
                k / (n as f64 * h)
            })
            .collect();
        let energy = buf.iter().map(|c| c.norm_sqr()).collect();
        Ok(Self { freqs, energy })
    }

    pub fn total(&self) -> f64 {
        self.energy.iter().sum()
    }

    /// Energy fraction outside `[lo, hi]`; 0 for the zero function.
    pub fn leakage(&self, lo: f64, hi: f64) -> f64 {
        let total = self.total();
        if total == 0.0 {
            return 0.0;
        }
        // rounding slack at the band edges
        let tol = self.freqs.get(1).copied().unwrap_or(0.0).abs() * 1e-9;
        let inside: f64 = self
            .freqs
            .iter()
            .zip(&self.energy)
            .filter(|(&f, _)| f >= lo - tol && f <= hi + tol)
            .map(|(_, &e)| e)
            .sum();
        ((total - inside) / total).clamp(0.0, 1.0)
    }

    /// Energy-weighted mean frequency.
    pub fn centroid(&self) -> f64 {
        let total = self.total();
        if total == 0.0 {
            return 0.0;
        }
        self.freqs.iter().zip(&self.energy).map(|(f, e)| f * e).sum::<f64>() / total
    }
}

/// Leakage of `values` outside `[lo, hi]` (cycles).
pub fn line_leakage(values: &[Complex64], h: f64, lo: f64, hi: f64) -> Result<f64> {
    Ok(LineSpectrum::new(values, h)?.leakage(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::centered_uniform_grid;
    use std::f64::consts::PI;

    #[test]
    fn pure_tone_on_a_bin() {
        let n = 1024;
        let x = centered_uniform_grid(64.0, n);
        let h = x[1] - x[0];
        let f0 = 5.0 / (n as f64 * h);
        let v: Vec<Complex64> = x.iter().map(|&t| Complex64::from_polar(1.0, 2.0 * PI * f0 * t)).collect();
        let s = LineSpectrum::new(&v, h).unwrap();
        assert!(s.leakage(0.0, 1.1 * f0) < 1e-20);
        assert!(s.leakage(-f0, 0.5 * f0) > 0.999);
        assert!((s.centroid() - f0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_band() {
        let x = centered_uniform_grid(20.0, 4096);
        let h = x[1] - x[0];
        let v: Vec<Complex64> = x.iter().map(|&t| Complex64::new((-PI * t * t).exp(), 0.0)).collect();
        // |f_hat|^2 = e^{-2 pi xi^2}; fraction beyond |xi| = 2 is erfc(2 sqrt(2 pi)) ~ 1e-11
        let l = line_leakage(&v, h, -2.0, 2.0).unwrap();
        assert!(l < 1e-10, "{l}");
        assert!(line_leakage(&v, h, -0.5, 0.5).unwrap() > 0.01);
        assert_eq!(line_leakage(&[Complex64::new(0.0, 0.0); 8], 1.0, 0.0, 1.0).unwrap(), 0.0);
    }
}
