//! Command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 weight not admissible,
//! 3 leakage above the ceiling, 4 parse error, 5 gamma out of range,
//! 6 Hoelder chain diverged.
//!
//! Non-radial weights for `majorize` are a preset name or an expression in
//! `x1..xd` with `+ - * / ^`, `exp log sqrt abs` and `norm(x)`.

pub mod commands;
pub mod config;
pub mod csvio;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::BmError;
use commands::Outcome;
use config::{parse_units, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "bmforge", version, about = "Weighted band-limited majorants on R^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build f for a radial weight and certify its spectrum.
    Construct(Common),
    /// Radial Fourier transform of a profile by every applicable route.
    Transform {
        /// Profile CSV (r, value_real, value_imag).
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check a candidate profile against a weight and a band.
    Verify {
        /// Candidate profile CSV (r, value_real, value_imag).
        candidate: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Reduce a non-radial weight to a radial majorant.
    Majorize(Common),
    /// Calibrate the Sonine constants against the Poisson route.
    Calibrate(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset (exp_sqrt, const, exp_abs, power:Q), weight file, or expression (majorize).
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Initial half-width of the 1D construction window.
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long)]
    tol_leakage: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Frequency units written to output files: angular or cyclic.
    #[arg(long)]
    units: Option<String>,
    /// After majorize, run construct on the radial majorant.
    #[arg(long = "continue")]
    continue_construct: bool,
}

impl Common {
    fn resolve(&self) -> crate::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(p) = &self.config {
            cfg.apply_file(p)?;
        }
        if let Some(v) = &self.weight {
            cfg.weight = Some(v.clone());
        }
        cfg.dim = self.dim.or(cfg.dim);
        cfg.sigma = self.sigma.or(cfg.sigma);
        cfg.gamma = self.gamma.or(cfg.gamma);
        cfg.grid_points = self.grid_points.unwrap_or(cfg.grid_points);
        cfg.extent = self.extent.unwrap_or(cfg.extent);
        cfg.tol_leakage = self.tol_leakage.unwrap_or(cfg.tol_leakage);
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        if let Some(u) = &self.units {
            cfg.units = parse_units(u)?;
        }
        cfg.continue_construct |= self.continue_construct;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn exit_code(e: &BmError) -> i32 {
    match e {
        BmError::NotAdmissible(_) => 2,
        BmError::LeakageTooHigh { .. } => 3,
        BmError::Parse(_) => 4,
        BmError::GammaOutOfRange { .. } => 5,
        BmError::HolderChainDiverged(_) => 6,
        _ => 1,
    }
}

/// Caps the global thread pool from `BMFORGE_THREADS` (first call wins).
fn init_threads() {
    if let Some(n) = std::env::var("BMFORGE_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn dispatch(cli: Cli) -> crate::Result<Outcome> {
    match cli.command {
        Command::Construct(c) => commands::cmd_construct(&c.resolve()?),
        Command::Transform { input, common } => commands::cmd_transform(&common.resolve()?, &input),
        Command::Verify { candidate, common } => commands::cmd_verify(&common.resolve()?, &candidate),
        Command::Majorize(c) => commands::cmd_majorize(&c.resolve()?),
        Command::Calibrate(c) => commands::cmd_calibrate(&c.resolve()?),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Summaries go to stdout, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match dispatch(cli) {
        Ok(out) => {
            print!("{}", out.summary);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
