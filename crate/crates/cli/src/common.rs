use std::path::Path;

use sandpile_harmonic::green::{compute_green, GreenError, QuadratureSpec};
use sandpile_harmonic::harmonic::{Extension, IntegerField, XiSpec};
use sandpile_harmonic::sandpile::{parse_grid, HeightConfig};
use sandpile_harmonic::GreenTable64;

use crate::output::{read_input, Failure};
use crate::ExtensionChoice;

pub fn critical_gamma(dim: usize, gamma: Option<i64>) -> i64 {
    gamma.unwrap_or(2 * dim as i64)
}

pub fn default_radius(dim: usize, radius: Option<usize>) -> usize {
    radius.unwrap_or(if dim == 2 { 16 } else { 12 })
}

pub fn green_failure(e: GreenError<f64>) -> Failure {
    match e {
        GreenError::Unconverged { .. } | GreenError::EntropyUnconverged { .. } => Failure::Tolerance(e.to_string()),
        _ => Failure::input(e),
    }
}

pub fn table(dim: usize, gamma: i64, radius: usize) -> Result<GreenTable64, Failure> {
    compute_green(dim, gamma, radius, &QuadratureSpec::default_for(dim, gamma)).map_err(green_failure)
}

pub fn load_grid(path: &Path) -> Result<HeightConfig, Failure> {
    parse_grid(&read_input(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn field(v: &HeightConfig, ext: ExtensionChoice) -> IntegerField {
    match ext {
        ExtensionChoice::Zero => IntegerField::from_config(v, Extension::Zero),
        ExtensionChoice::Max => IntegerField::from_config(v, Extension::Constant(v.gamma() - 1)),
    }
}

pub fn spec(expr: &str, table: &GreenTable64) -> Result<XiSpec<f64>, Failure> {
    let g = sandpile_harmonic::laurent::parse_expression(expr, table.dim).map_err(Failure::input)?;
    XiSpec::new(&g, table).map_err(Failure::input)
}

/// `2x3x4` -> `[2, 3, 4]`
pub fn parse_extents(s: &str) -> Result<Vec<usize>, Failure> {
    s.split('x')
        .map(|p| p.trim().parse::<usize>().map_err(|_| Failure::Input(format!("bad window `{s}`, expected e.g. 2x2"))))
        .collect()
}
