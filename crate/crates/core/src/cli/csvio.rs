//! CSV files. Every file starts with a `# units=angular|cyclic` line, then a
//! column header. Numbers are written with 17 significant digits so that
//! identical runs produce identical bytes.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{BmError, Result};
use crate::radial_ft::FreqUnits;
use crate::sampled::{SampledFunction, Symmetry};

fn csv_err(e: csv::Error) -> BmError {
    match e.kind() {
        csv::ErrorKind::Io(_) => BmError::Io(e.to_string()),
        _ => BmError::Parse(e.to_string()),
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_table(path: &Path, units: FreqUnits, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "# units={units}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.into_iter().map(num)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `(r, value_real, value_imag)` (or `x` for a line function).
pub fn write_profile(path: &Path, units: FreqUnits, abscissa: &str, f: &SampledFunction) -> Result<()> {
    write_table(
        path,
        units,
        &[abscissa, "value_real", "value_imag"],
        f.grid().iter().zip(f.values()).map(|(&r, v)| vec![r, v.re, v.im]),
    )
}

/// `(xi, value_real, value_imag)` for transforms.
pub fn write_transform(path: &Path, units: FreqUnits, f: &SampledFunction) -> Result<()> {
    write_profile(path, units, "xi", f)
}

/// `(xi, shell_energy)` with `xi` the bin center.
pub fn write_spectrum(path: &Path, units: FreqUnits, edges: &[f64], energies: &[f64]) -> Result<()> {
    write_table(
        path,
        units,
        &["xi", "shell_energy"],
        edges.windows(2).zip(energies).map(|(w, &e)| vec![units.from_angular(FreqUnits::Cyclic.to_angular(0.5 * (w[0] + w[1]))), e]),
    )
}

/// Reads a three-column profile; returns it with the declared units, if any.
pub fn read_profile(path: &Path) -> Result<(SampledFunction, Option<FreqUnits>)> {
    let text = std::fs::read_to_string(path)?;
    parse_profile(&text)
}

pub fn parse_profile(text: &str) -> Result<(SampledFunction, Option<FreqUnits>)> {
    let units = text
        .lines()
        .next()
        .and_then(|l| l.trim().strip_prefix('#'))
        .and_then(|l| l.trim().strip_prefix("units="))
        .map(super::config::parse_units)
        .transpose()?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 3 {
            return Err(BmError::Parse(format!("row {}: expected 3 columns, got {}", i + 1, rec.len())));
        }
        let f = |k: usize| {
            rec[k].parse::<f64>().map_err(|e| BmError::Parse(format!("row {}: '{}': {e}", i + 1, &rec[k])))
        };
        grid.push(f(0)?);
        values.push(Complex64::new(f(1)?, f(2)?));
    }
    let symmetry = if grid.first().is_some_and(|&r| r >= 0.0) { Symmetry::Even } else { Symmetry::None };
    Ok((SampledFunction::new(grid, values, symmetry)?, units))
}
