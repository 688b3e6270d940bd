//! Sampled potentials: ring, harmonic oscillator, finite well, double well,
//! and tabulated user data.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Declarative description of `V(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `V = 0` on a periodic domain.
    RingZero,
    /// `V = x² / 2`.
    Harmonic,
    /// `0` for `|x| < half_width`, `v0` elsewhere.
    FiniteWell { v0: f64, half_width: f64 },
    /// `c2 x² + c4 x⁴ + c0`.
    DoubleWell { c2: f64, c4: f64, c0: f64 },
    /// Samples given on an explicit grid, used as-is.
    Tabulated { xs: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Symmetric,
    Asymmetric,
}

impl PotentialSpec {
    pub fn finite_well(v0: f64, half_width: f64) -> Result<Self> {
        if !(v0.is_finite() && v0 > 0.0) || !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!(
                "finite well needs v0 > 0 and half_width > 0, got {v0}, {half_width}"
            )));
        }
        Ok(Self::FiniteWell { v0, half_width })
    }

    /// The well depth used throughout: `V0 = 100`, `|x| < 1`.
    pub fn default_finite_well() -> Self {
        Self::FiniteWell {
            v0: 100.0,
            half_width: 1.0,
        }
    }

    /// `-4x² + x⁴/2 + 8`: minima `V = 0` at `x = ±2`, barrier `V = 8` at 0.
    pub fn default_double_well() -> Self {
        Self::DoubleWell {
            c2: -4.0,
            c4: 0.5,
            c0: 8.0,
        }
    }

    pub fn tabulated(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                actual: values.len(),
            });
        }
        if values.iter().chain(&xs).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tabulated potential".into()));
        }
        Ok(Self::Tabulated { xs, values })
    }

    /// Parse a CLI potential name: `ring`, `harmonic`, `finite-well`,
    /// `double-well` or `file:<path>`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "ring" => Ok(Self::RingZero),
            "harmonic" => Ok(Self::Harmonic),
            "finite-well" => Ok(Self::default_finite_well()),
            "double-well" => Ok(Self::default_double_well()),
            other => match other.strip_prefix("file:") {
                Some(path) => load_tabulated(Path::new(path)),
                None => Err(Error::Config(format!("unknown potential '{other}'"))),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::RingZero => "ring",
            Self::Harmonic => "harmonic",
            Self::FiniteWell { .. } => "finite-well",
            Self::DoubleWell { .. } => "double-well",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    /// Pointwise value for the analytic families; `None` for tabulated data.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        match *self {
            Self::RingZero => Some(0.0),
            Self::Harmonic => Some(0.5 * x * x),
            Self::FiniteWell { v0, half_width } => {
                Some(if x.abs() < half_width { 0.0 } else { v0 })
            }
            Self::DoubleWell { c2, c4, c0 } => {
                let x2 = x * x;
                Some(c2 * x2 + c4 * x2 * x2 + c0)
            }
            Self::Tabulated { .. } => None,
        }
    }

    /// Grid used when none is given: the ring on `[-1, 1)` with 480 points,
    /// everything else at `dx = 0.01` on a domain wide enough for the tails.
    pub fn default_grid(&self) -> Result<Grid> {
        match self {
            Self::RingZero => Grid::new(480, -1.0, 1.0),
            Self::Harmonic => Grid::new(2000, -10.0, 10.0),
            Self::FiniteWell { .. } | Self::DoubleWell { .. } => Grid::new(1600, -8.0, 8.0),
            Self::Tabulated { xs, .. } => {
                if xs.len() < 4 {
                    return Err(Error::InvalidGrid(
                        "tabulated potential has < 4 samples".into(),
                    ));
                }
                let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
                Grid::new(xs.len(), xs[0], xs[0] + dx * xs.len() as f64)
            }
        }
    }
}

/// Sample `spec` on `grid`.
pub fn sample_potential(spec: &PotentialSpec, grid: &Grid) -> Result<Vec<f64>> {
    match spec {
        PotentialSpec::Tabulated { xs, values } => {
            if values.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    actual: values.len(),
                });
            }
            let tol = 1e-9 * grid.x_max().abs().max(grid.x_min().abs()).max(grid.dx());
            if let Some(j) = xs
                .iter()
                .enumerate()
                .position(|(j, &x)| (x - grid.x(j)).abs() > tol)
            {
                return Err(Error::Config(format!(
                    "tabulated sample {j} at x = {} does not match grid point {}",
                    xs[j],
                    grid.x(j)
                )));
            }
            Ok(values.clone())
        }
        _ => Ok(grid
            .xs()
            .into_iter()
            .map(|x| spec.value_at(x).expect("analytic potential"))
            .collect()),
    }
}

/// Whether `V(x) = V(-x)` on a grid symmetric about zero.
pub fn parity_of_potential(spec: &PotentialSpec, grid: &Grid) -> Result<Symmetry> {
    let v = sample_potential(spec, grid)?;
    Ok(symmetry_of_samples(&v, grid))
}

pub fn symmetry_of_samples(v: &[f64], grid: &Grid) -> Symmetry {
    if !grid.is_symmetric() {
        return Symmetry::Asymmetric;
    }
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let worst = (0..grid.len())
        .map(|j| (v[j] - v[grid.mirror_index(j)]).abs())
        .fold(0.0f64, f64::max);
    if worst <= 1e-10 * scale {
        Symmetry::Symmetric
    } else {
        Symmetry::Asymmetric
    }
}

/// Read a two-column `x,V` CSV file; a non-numeric first row is taken as a header.
pub fn load_tabulated(path: &Path) -> Result<PotentialSpec> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(Error::Config(format!(
                "{} row {}: expected 2 columns, got {}",
                path.display(),
                line + 1,
                record.len()
            )));
        }
        let x = record[0].parse::<f64>();
        let v = record[1].parse::<f64>();
        match (x, v) {
            (Ok(x), Ok(v)) => {
                xs.push(x);
                values.push(v);
            }
            _ if line == 0 => continue,
            _ => {
                return Err(Error::Config(format!(
                    "{} row {}: non-numeric values",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    PotentialSpec::tabulated(xs, values)
}
