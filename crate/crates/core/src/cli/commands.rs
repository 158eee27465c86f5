use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::bessel::{bessel_poisson, calibrate_sonine_constant_at, sonine_integral};
use crate::error::{BmError, Result};
use crate::majorize::{reduce_nonradial, MajorizeOptions, NonRadialWeight};
use crate::onedim_bm::ConstructOptions;
use crate::pipeline::{construct_radial, RadialConstruction, RadialOptions};
use crate::radial_ft::{
    moment_integrals, radial_transform, sonine_inner_relative, spectrum_report, structured_route, FreqUnits,
    RadialField, Route, SpectrumReport,
};
use crate::sampled::{uniform_grid, SampledFunction, Symmetry};
use crate::weights::WeightProfile;

use super::config::RunConfig;
use super::csvio;

/// `max |f| / omega` above this fails the majorization check.
pub const MAJORIZATION_SLACK: f64 = 1e-9;
/// Moment (odd d) or inner-Sonine (even d) integrals beyond the band must be
/// this small relative to their absolute scale.
pub const VANISHING_TOL: f64 = 1e-4;
/// Audit frequencies `2 pi sigma (1 + 0.15 j)`, `j = 1..=AUDIT_TAUS`.
pub const AUDIT_TAUS: usize = 20;
/// Frequency samples written by `transform`.
pub const TRANSFORM_POINTS: usize = 257;
/// Default sigma for `majorize` when none is configured.
pub const MAJORIZE_SIGMA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    /// Machine-readable `key = value` lines for stdout.
    pub summary: String,
}

pub fn applicable_routes(d: usize) -> Vec<Route> {
    if d == 1 {
        vec![Route::Direct]
    } else {
        vec![Route::Direct, structured_route(d)]
    }
}

/// Angular audit frequencies past the band edge `2 pi sigma`.
pub fn audit_taus(sigma: f64) -> Vec<f64> {
    (1..=AUDIT_TAUS).map(|j| 2.0 * PI * sigma * (1.0 + 0.15 * j as f64)).collect()
}

fn create_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn write_spectra(dir: &Path, units: FreqUnits, reports: &[SpectrumReport]) -> Result<()> {
    for r in reports {
        csvio::write_spectrum(&dir.join(format!("spectrum_{}.csv", r.route)), units, &r.bin_edges, &r.shell_energies)?;
    }
    Ok(())
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

pub fn cmd_construct(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.require_dim()?;
    let sigma = cfg.require_sigma()?;
    let phi = cfg.radial_weight()?;
    construct_for_profile(cfg, &phi, d, sigma)
}

/// Construction, output files and the exit decision for a radial weight.
pub fn construct_for_profile(cfg: &RunConfig, phi: &WeightProfile, d: usize, sigma: f64) -> Result<Outcome> {
    let opts = RadialOptions {
        construct: ConstructOptions {
            half_extent: cfg.extent,
            points: cfg.grid_points,
            leakage_ceiling: cfg.tol_leakage,
            ..Default::default()
        },
        routes: None,
    };
    let c = construct_radial(phi, d, sigma, &opts)?;
    create_out(&cfg.out)?;
    csvio::write_profile(&cfg.out.join("profile.csv"), cfg.units, "r", &c.g.samples)?;
    csvio::write_profile(&cfg.out.join("candidate.csv"), cfg.units, "x", &c.g.candidate.samples)?;
    write_spectra(&cfg.out, cfg.units, &c.reports)?;

    let leak_ok = c.reports.iter().all(|r| r.leakage_ratio <= cfg.tol_leakage);
    let maj_ok = c.majorization_ratio <= 1.0 + MAJORIZATION_SLACK;
    let nonzero = c.l2_norm > 0.0;
    let (code, failed) = if !maj_ok {
        (1, "majorization")
    } else if !nonzero {
        (1, "nonzero")
    } else if !leak_ok {
        (3, "leakage")
    } else {
        (0, "none")
    };
    let report = construct_report(phi, cfg, &c, failed);
    write_text(&cfg.out.join("spectrum_report.txt"), &report)?;

    let mut summary = format!("command = construct\nweight = {}\ndimension = {d}\nsigma = {sigma}\n", phi.name());
    for r in &c.reports {
        let _ = writeln!(summary, "leakage.{} = {:.6e}", r.route, r.leakage_ratio);
    }
    let _ = write!(
        summary,
        "majorization_ratio = {:.12e}\nl2_norm = {:.12e}\nstatus = {}\nfailed_invariant = {failed}\n",
        c.majorization_ratio,
        c.l2_norm,
        pass(code == 0)
    );
    if code == 3 {
        let worst = c.worst_leakage();
        eprintln!("error: {}", BmError::LeakageTooHigh { ratio: worst, ceiling: cfg.tol_leakage });
    } else if code != 0 {
        eprintln!("error: invariant '{failed}' failed");
    }
    Ok(Outcome { code, summary })
}

fn construct_report(phi: &WeightProfile, cfg: &RunConfig, c: &RadialConstruction, failed: &str) -> String {
    let mut s = String::from("[construction]\n");
    let _ = write!(
        s,
        "weight = {}\ndimension = {}\nsigma = {}\nunits = {}\nhalf_extent = {}\ngrid_points = {}\nclamp_exponent = {}\n\
         deflation_order = {}\ng_origin = {:.12e}\nc_measured = {:.12e}\nmajorization_ratio = {:.12e}\nl2_norm = {:.12e}\n\
         leakage_ceiling = {:.3e}\n",
        phi.name(),
        c.dimension,
        c.sigma,
        cfg.units,
        c.half_extent,
        cfg.grid_points,
        c.clamp.map_or("none".to_string(), |q| q.to_string()),
        c.deflation.as_ref().map_or("none".to_string(), |df| df.order.to_string()),
        c.g.origin,
        c.g.c_measured,
        c.majorization_ratio,
        c.l2_norm,
        cfg.tol_leakage
    );
    s += "[admissibility]\n";
    s += &c.admissibility.to_text();
    for r in &c.reports {
        let _ = writeln!(s, "[route {}]", r.route);
        s += &r.to_text();
    }
    let _ = write!(s, "[status]\nstatus = {}\nfailed_invariant = {failed}\n", pass(failed == "none"));
    s
}

pub fn cmd_transform(cfg: &RunConfig, input: &Path) -> Result<Outcome> {
    let d = cfg.require_dim()?;
    let sigma = cfg.require_sigma()?;
    let (profile, _) = csvio::read_profile(input)?;
    let field = RadialField::new(profile, d)?;
    let top = cfg.units.from_angular(FreqUnits::Cyclic.to_angular(crate::radial_ft::SPECTRUM_SPAN * sigma));
    let xis = uniform_grid(0.0, top, TRANSFORM_POINTS);
    create_out(&cfg.out)?;
    let routes = applicable_routes(d);
    let mut transforms = Vec::new();
    let mut reports = Vec::new();
    for &route in &routes {
        let ft = radial_transform(&field, &xis, cfg.units, route)?;
        csvio::write_transform(&cfg.out.join(format!("transform_{route}.csv")), cfg.units, &ft)?;
        transforms.push(ft);
        reports.push(spectrum_report(&field, sigma, route)?);
    }
    write_spectra(&cfg.out, cfg.units, &reports)?;
    let mismatch = route_mismatch(&transforms);
    let mut s = format!("command = transform\ndimension = {d}\nsigma = {sigma}\nunits = {}\n", cfg.units);
    for r in &reports {
        let _ = writeln!(s, "leakage.{} = {:.6e}", r.route, r.leakage_ratio);
    }
    let _ = writeln!(s, "route_mismatch = {mismatch:.3e}");
    let mut report = s.clone();
    for r in &reports {
        let _ = writeln!(report, "[route {}]", r.route);
        report += &r.to_text();
    }
    write_text(&cfg.out.join("spectrum_report.txt"), &report)?;
    Ok(Outcome { code: 0, summary: s })
}

/// Largest pointwise difference between the first route and the others,
/// relative to the first route's peak.
fn route_mismatch(ts: &[SampledFunction]) -> f64 {
    let Some(first) = ts.first() else { return 0.0 };
    let peak = first.max_abs().max(f64::MIN_POSITIVE);
    ts[1..]
        .iter()
        .flat_map(|t| t.values().iter().zip(first.values()).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max)
        / peak
}

pub fn cmd_verify(cfg: &RunConfig, candidate: &Path) -> Result<Outcome> {
    let d = cfg.require_dim()?;
    let sigma = cfg.require_sigma()?;
    let phi = cfg.radial_weight()?;
    let (profile, _) = csvio::read_profile(candidate)?;
    let field = RadialField::new(profile.clone(), d)?;
    let mut lines = vec![
        "command = verify".to_string(),
        format!("weight = {}", phi.name()),
        format!("dimension = {d}"),
        format!("sigma = {sigma}"),
    ];
    let mut failed: Vec<&str> = Vec::new();

    // |g| <= phi in the log domain, so tiny weights do not underflow
    let log_slack = MAJORIZATION_SLACK.ln_1p();
    let worst_log = profile
        .grid()
        .iter()
        .zip(profile.values())
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(&r, v)| v.norm().ln() + phi.log_weight(r))
        .fold(f64::NEG_INFINITY, f64::max);
    let maj_ok = worst_log <= log_slack;
    lines.push(format!("majorization_ratio = {:.12e}", worst_log.exp()));
    lines.push(format!("check.majorization = {}", pass(maj_ok)));
    if !maj_ok {
        failed.push("majorization");
    }

    let l2 = field.l2_norm_sq().sqrt();
    lines.push(format!("l2_norm = {l2:.12e}"));
    lines.push(format!("check.nonzero = {}", pass(l2 > 0.0)));
    if l2 <= 0.0 {
        failed.push("nonzero");
    }

    let mut leak_ok = true;
    for route in applicable_routes(d) {
        let r = spectrum_report(&field, sigma, route)?;
        let ok = r.leakage_ratio <= cfg.tol_leakage;
        leak_ok &= ok;
        lines.push(format!("leakage.{route} = {:.6e}", r.leakage_ratio));
        lines.push(format!("check.leakage.{route} = {}", pass(ok)));
    }
    if !leak_ok {
        failed.push("leakage");
    }

    let (name, worst) = if d % 2 == 1 {
        let real = SampledFunction::from_real(profile.grid().to_vec(), &profile.real_values(), Symmetry::Even)?;
        let worst = if profile.is_real() {
            audit_taus(sigma)
                .iter()
                .map(|&t| moment_integrals(&real, t, d).map(|m| m.max_relative()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        ("moments", worst)
    } else {
        let worst = audit_taus(sigma)
            .iter()
            .map(|&t| sonine_inner_relative(&field, t))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        ("sonine_inner", worst)
    };
    let van_ok = worst <= VANISHING_TOL;
    lines.push(format!("{name}.max_relative = {worst:.6e}"));
    lines.push(format!("check.{name} = {}", pass(van_ok)));
    if !van_ok {
        failed.push(if d % 2 == 1 { "moments" } else { "sonine_inner" });
    }

    let code = if failed.is_empty() {
        0
    } else if failed.contains(&"leakage") {
        3
    } else {
        1
    };
    lines.push(format!("status = {}", pass(code == 0)));
    lines.push(format!("failed_invariants = {}", if failed.is_empty() { "none".to_string() } else { failed.join(",") }));
    let summary = lines.join("\n") + "\n";
    create_out(&cfg.out)?;
    write_text(&cfg.out.join("verify_report.txt"), &summary)?;
    Ok(Outcome { code, summary })
}

pub fn cmd_majorize(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.require_dim()?;
    let gamma = cfg.gamma.ok_or_else(|| BmError::InvalidParameter("--gamma is required".into()))?;
    let sigma = cfg.sigma.unwrap_or(MAJORIZE_SIGMA);
    let omega = NonRadialWeight::parse(cfg.require_weight()?, d)?;
    let opts = MajorizeOptions { seed: cfg.seed, ..Default::default() };
    let red = reduce_nonradial(&omega, gamma, sigma, &opts)?;
    create_out(&cfg.out)?;
    let prof = &red.majorant.profile;
    let rad = SampledFunction::from_real(
        prof.grid().to_vec(),
        &prof.log_values().iter().map(|&om| (-om).exp()).collect::<Vec<_>>(),
        Symmetry::Even,
    )?;
    csvio::write_profile(&cfg.out.join("omega_rad.csv"), cfg.units, "r", &rad)?;
    let mut report = format!("weight = {}\ngamma = {gamma}\nsigma = {sigma}\nseed = {}\n", omega.name(), cfg.seed);
    report += &red.to_text();
    write_text(&cfg.out.join("holder_report.txt"), &report)?;

    let audit_ok = red.audit.passed();
    let mut summary = format!(
        "command = majorize\ndimension = {d}\ngamma = {gamma}\nrhs_sum = {:.12e}\nlhs_sum = {:.12e}\nholds = {}\n\
         audit_violations = {}\nadmissibility = {}\n",
        red.holder.rhs_sum, red.holder.lhs_sum, red.holder.holds, red.audit.violations, red.admissibility.verdict
    );
    if !audit_ok {
        eprintln!("error: radial majorant falls below Omega at {} audit samples", red.audit.violations);
        summary += "status = fail\nfailed_invariant = majorization\n";
        return Ok(Outcome { code: 1, summary });
    }
    if !cfg.continue_construct {
        summary += "status = pass\n";
        return Ok(Outcome { code: 0, summary });
    }
    let next = construct_for_profile(cfg, prof, d, sigma)?;
    Ok(Outcome { code: next.code, summary: summary + &next.summary })
}

/// Sonine constants for `(nu, mu) = ((d-1)/2, -1/2)`, `d = 2..=d_max`, with
/// their spread across anchors, and the Mehler-Sonine values of `J_0`.
pub fn cmd_calibrate(cfg: &RunConfig) -> Result<Outcome> {
    let d_max = cfg.dim.unwrap_or(8).max(2);
    let anchors = [0.5, 1.0, 2.0, 4.0];
    let mut s = String::from("command = calibrate\n");
    let mut worst_spread = 0.0f64;
    for d in 2..=d_max {
        let nu = (d as f64 - 1.0) / 2.0;
        let cs = anchors.iter().map(|&a| calibrate_sonine_constant_at(nu, -0.5, a)).collect::<Result<Vec<_>>>()?;
        let spread = cs.iter().map(|c| (c - cs[1]).abs()).fold(0.0, f64::max) / cs[1].abs();
        worst_spread = worst_spread.max(spread);
        let _ = writeln!(s, "sonine_constant.d{d} = {:.15e}\nsonine_spread.d{d} = {spread:.3e}", cs[1]);
    }
    for y in [1.0, 2.0] {
        let _ = writeln!(
            s,
            "j0_sonine.y{y} = {:.15e}\nj0_poisson.y{y} = {:.15e}",
            sonine_integral(0.5, -0.5, y)?,
            bessel_poisson(0.0, y)?
        );
    }
    let ok = worst_spread < 1e-8;
    let _ = writeln!(s, "status = {}", pass(ok));
    create_out(&cfg.out)?;
    write_text(&cfg.out.join("calibration.txt"), &s)?;
    Ok(Outcome { code: if ok { 0 } else { 1 }, summary: s })
}
