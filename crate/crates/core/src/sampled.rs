//! Sampled functions on one-dimensional grids.
//!
//! Every function that enters the pipeline is a set of samples plus the
//! piecewise-linear interpolation rule. Grids are strictly increasing.

use num_complex::Complex64;

use crate::error::{BmError, Result};

/// Parity tag. For `Even`/`Odd` the stored grid covers only `r >= 0` and
/// evaluation at negative abscissae reflects accordingly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    None,
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<Complex64>,
    symmetry: Symmetry,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>, symmetry: Symmetry) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(BmError::InvalidGrid(format!(
                "{} abscissae but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.is_empty() {
            return Err(BmError::GridTooShort("empty grid".into()));
        }
        check_increasing(&grid)?;
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(BmError::InvalidGrid("non-finite sample".into()));
        }
        if symmetry != Symmetry::None && grid[0] < 0.0 {
            return Err(BmError::InvalidGrid(
                "symmetric functions store only r >= 0".into(),
            ));
        }
        Ok(Self { grid, values, symmetry })
    }

    pub fn from_real(grid: Vec<f64>, values: &[f64], symmetry: Symmetry) -> Result<Self> {
        let values = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::new(grid, values, symmetry)
    }

    /// Samples `f` at every point of `grid`.
    pub fn from_fn<F>(grid: Vec<f64>, symmetry: Symmetry, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values, symmetry)
    }

    pub fn from_real_fn<F>(grid: Vec<f64>, symmetry: Symmetry, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        Self::from_fn(grid, symmetry, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Extent `[a, b]` of the stored samples.
    pub fn extent(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Piecewise-linear interpolation; zero outside the stored extent.
    pub fn eval(&self, x: f64) -> Complex64 {
        match self.symmetry {
            Symmetry::None => self.interp(x),
            Symmetry::Even => self.interp(x.abs()),
            Symmetry::Odd => {
                if x < 0.0 {
                    -self.interp(-x)
                } else {
                    self.interp(x)
                }
            }
        }
    }

    fn interp(&self, x: f64) -> Complex64 {
        let (a, b) = self.extent();
        if x < a || x > b || !x.is_finite() {
            return Complex64::new(0.0, 0.0);
        }
        let k = match self.grid.partition_point(|&g| g <= x) {
            0 => 0,
            k if k >= self.grid.len() => return self.values[self.grid.len() - 1],
            k => k - 1,
        };
        let (x0, x1) = (self.grid[k], self.grid[k + 1]);
        let t = (x - x0) / (x1 - x0);
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    /// Materializes the full-line representation of a symmetric function.
    pub fn to_full_line(&self) -> SampledFunction {
        if self.symmetry == Symmetry::None {
            return self.clone();
        }
        let sign = if self.symmetry == Symmetry::Odd { -1.0 } else { 1.0 };
        let skip = usize::from(self.grid[0] == 0.0);
        let mut grid: Vec<f64> = self.grid[skip..].iter().rev().map(|&r| -r).collect();
        let mut values: Vec<Complex64> =
            self.values[skip..].iter().rev().map(|&v| v * sign).collect();
        grid.extend_from_slice(&self.grid);
        values.extend_from_slice(&self.values);
        SampledFunction { grid, values, symmetry: Symmetry::None }
    }

    /// Restriction to `r >= 0`, tagged with the given symmetry.
    pub fn restrict_half_line(&self, symmetry: Symmetry) -> Result<SampledFunction> {
        let start = self.grid.partition_point(|&g| g < 0.0);
        SampledFunction::new(
            self.grid[start..].to_vec(),
            self.values[start..].to_vec(),
            symmetry,
        )
    }

    pub fn map<F: Fn(f64, Complex64) -> Complex64>(&self, f: F) -> SampledFunction {
        let values = self.grid.iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect();
        SampledFunction { grid: self.grid.clone(), values, symmetry: self.symmetry }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn check_increasing(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(BmError::InvalidGrid("non-finite abscissa".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(BmError::InvalidGrid(format!(
            "grid not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Graded radial grid: uniform with `uniform_points` cells on `[0, 1]`, then
/// geometric with ratio `ratio` up to `r_max` (last point clipped to `r_max`).
pub fn graded_grid(r_max: f64, uniform_points: usize, ratio: f64) -> Vec<f64> {
    assert!(ratio > 1.0 && uniform_points > 0);
    let mut grid: Vec<f64> = (0..=uniform_points)
        .map(|k| k as f64 / uniform_points as f64)
        .take_while(|&r| r <= r_max)
        .collect();
    let mut r = *grid.last().unwrap_or(&0.0);
    if r <= 0.0 {
        grid.push(r_max);
        return grid;
    }
    while r < r_max {
        r = (r * ratio).min(r_max);
        grid.push(r);
    }
    grid
}

/// Uniform line grid `x_j = (j - n/2) h`, `h = 2 * half_extent / n`.
pub fn centered_uniform_grid(half_extent: f64, n: usize) -> Vec<f64> {
    let h = 2.0 * half_extent / n as f64;
    (0..n).map(|j| (j as f64 - (n / 2) as f64) * h).collect()
}

pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|j| a + j as f64 * h).collect()
}
