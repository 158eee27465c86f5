//! Run configuration: flat `key = value` file, overridden by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{BmError, Result};
use crate::radial_ft::FreqUnits;
use crate::sampled::graded_grid;
use crate::weights::{parse_weight_file, WeightProfile, DEFAULT_R_MAX};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub weight: Option<String>,
    pub dim: Option<usize>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    /// Samples of the 1D construction grid (power of two).
    pub grid_points: usize,
    /// Initial half-width of the 1D construction window.
    pub extent: f64,
    /// Growth ratio of the graded grid presets are sampled on.
    pub grading_ratio: f64,
    pub tol_leakage: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub units: FreqUnits,
    pub continue_construct: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            weight: None,
            dim: None,
            sigma: None,
            gamma: None,
            grid_points: 1 << 16,
            extent: 200.0,
            grading_ratio: 1.02,
            tol_leakage: 1e-4,
            out: PathBuf::from("bmforge-out"),
            seed: 0,
            units: FreqUnits::Cyclic,
            continue_construct: false,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| BmError::Parse(format!("config key '{key}': '{v}': {e}")))
}

pub fn parse_units(v: &str) -> Result<FreqUnits> {
    match v.trim() {
        "angular" => Ok(FreqUnits::Angular),
        "cyclic" => Ok(FreqUnits::Cyclic),
        other => Err(BmError::Parse(format!("units must be 'angular' or 'cyclic', got '{other}'"))),
    }
}

/// `key = value` lines; `#` starts a comment. Keys use underscores or dashes.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| BmError::Parse(format!("config line {}: expected 'key = value'", lineno + 1)))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (k, v) in parse_config_text(&text)? {
            match k.as_str() {
                "weight" => self.weight = Some(v),
                "dim" => self.dim = Some(parse_value(&k, &v)?),
                "sigma" => self.sigma = Some(parse_value(&k, &v)?),
                "gamma" => self.gamma = Some(parse_value(&k, &v)?),
                "grid_points" => self.grid_points = parse_value(&k, &v)?,
                "extent" => self.extent = parse_value(&k, &v)?,
                "grading_ratio" => self.grading_ratio = parse_value(&k, &v)?,
                "tol_leakage" => self.tol_leakage = parse_value(&k, &v)?,
                "out" => self.out = PathBuf::from(v),
                "seed" => self.seed = parse_value(&k, &v)?,
                "units" => self.units = parse_units(&v)?,
                "continue" => self.continue_construct = parse_value(&k, &v)?,
                _ => return Err(BmError::Parse(format!("unknown config key '{k}'"))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(BmError::InvalidParameter(format!("sigma = {s} must be positive")));
            }
        }
        if self.dim == Some(0) {
            return Err(BmError::DimensionInvalid(0));
        }
        if !self.grid_points.is_power_of_two() || self.grid_points < 64 {
            return Err(BmError::InvalidParameter(format!(
                "grid points must be a power of two >= 64, got {}",
                self.grid_points
            )));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(BmError::InvalidParameter(format!("extent = {} must be positive", self.extent)));
        }
        if !(self.grading_ratio > 1.0) {
            return Err(BmError::InvalidParameter(format!("grading ratio {} must exceed 1", self.grading_ratio)));
        }
        if !(self.tol_leakage > 0.0) {
            return Err(BmError::InvalidParameter(format!("leakage tolerance {} must be positive", self.tol_leakage)));
        }
        Ok(())
    }

    pub fn require_dim(&self) -> Result<usize> {
        self.dim.ok_or_else(|| BmError::InvalidParameter("--dim is required".into()))
    }

    pub fn require_sigma(&self) -> Result<f64> {
        self.sigma.ok_or_else(|| BmError::InvalidParameter("--sigma is required".into()))
    }

    pub fn require_weight(&self) -> Result<&str> {
        self.weight.as_deref().ok_or_else(|| BmError::InvalidParameter("--weight is required".into()))
    }

    /// A preset name, else a two-column weight file.
    pub fn radial_weight(&self) -> Result<WeightProfile> {
        let spec = self.require_weight()?;
        let grid = graded_grid(DEFAULT_R_MAX, 100, self.grading_ratio);
        match WeightProfile::preset_on(spec, grid) {
            Ok(p) => Ok(p),
            Err(preset_err) => {
                let path = Path::new(spec);
                if path.is_file() {
                    parse_weight_file(&std::fs::read_to_string(path)?)
                } else {
                    Err(BmError::Parse(format!("'{spec}' is neither a preset nor a readable file ({preset_err})")))
                }
            }
        }
    }
}
