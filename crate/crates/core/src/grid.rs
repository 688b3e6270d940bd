//! Uniform periodic grids, wave fields, and Fourier-multiplier operators.
//!
//! The grid is periodic: `x_max` is identified with `x_min` and is not a
//! sample point. Wavenumbers follow the usual FFT ordering (non-negative
//! frequencies first, then the negative ones).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform 1-D grid with periodic spacing `dx = (x_max - x_min) / n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    x_min: f64,
    x_max: f64,
    dx: f64,
}

impl Grid {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_points < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 points, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "domain [{x_min}, {x_max}) has non-positive span"
            )));
        }
        let dx = (x_max - x_min) / n_points as f64;
        Ok(Self {
            n_points,
            x_min,
            x_max,
            dx,
        })
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Wavenumber spacing `2π / (n dx)`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.dx)
    }

    /// Position of sample `j`.
    ///
    /// Samples are laid out as `mid + (j - n/2) dx` so that a domain
    /// symmetric about zero produces sample positions that are exact
    /// negatives of each other under [`Grid::mirror_index`].
    pub fn x(&self, j: usize) -> f64 {
        let half = self.n_points / 2;
        let mid = if self.n_points.is_multiple_of(2) {
            0.5 * (self.x_min + self.x_max)
        } else {
            self.x_min + half as f64 * self.dx
        };
        mid + (j as f64 - half as f64) * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = self.dk();
        (0..n)
            .map(|j| {
                if j < n.div_ceil(2) {
                    j as f64 * dk
                } else {
                    -((n - j) as f64) * dk
                }
            })
            .collect()
    }

    /// True when the domain is centred on zero, which makes `x -> -x` a
    /// permutation of the samples.
    pub fn is_symmetric(&self) -> bool {
        let scale = self.x_max.abs().max(self.x_min.abs());
        (self.x_min + self.x_max).abs() <= 1e-12 * scale
    }

    /// Index of the sample at `-x(j)` on a symmetric grid. Sample 0 sits on
    /// the periodic boundary and maps to itself.
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.n_points - j) % self.n_points
    }
}

/// Construct a [`Grid`]; see [`Grid::new`].
pub fn make_grid(n_points: usize, x_min: f64, x_max: f64) -> Result<Grid> {
    Grid::new(n_points, x_min, x_max)
}

/// Wavenumbers of `grid` in FFT order.
pub fn wavenumbers(grid: &Grid) -> Vec<f64> {
    grid.wavenumbers()
}

/// `|k|^alpha` with the zero mode pinned to zero.
pub fn abs_pow(k: f64, alpha: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k.abs().powf(alpha)
    }
}

/// Complex samples of a wavefunction on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid
            .xs()
            .into_iter()
            .map(|x| Complex64::new(f(x), 0.0))
            .collect();
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.xs().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `<self, other> = Σ conj(self_j) other_j dx`.
    pub fn inner(&self, other: &WaveField) -> Complex64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * self.grid.dx
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx
    }

    /// Discrete L2 norm with `dx` quadrature weight.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.values.iter_mut().for_each(|z| *z *= factor);
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: Complex64, other: &WaveField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += factor * b;
        }
    }

    /// Scale to unit norm, returning the norm before scaling.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Degenerate(format!(
                "cannot normalize field of norm {norm}"
            )));
        }
        self.scale(Complex64::new(1.0 / norm, 0.0));
        Ok(norm)
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn sup_distance(&self, other: &WaveField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Forward/inverse FFT pair for one grid size. The inverse carries the
/// `1/n` factor so that `inverse(forward(f)) == f`.
#[derive(Clone)]
pub struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            n,
        }
    }

    pub fn for_grid(grid: &Grid) -> Self {
        Self::new(grid.len())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    pub fn forward_with_scratch(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(data, scratch);
    }

    pub fn inverse_with_scratch(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, scratch);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// Multiply the spectrum of `data` by `multiplier` (FFT ordering).
    pub fn apply_multiplier(
        &self,
        data: &mut [Complex64],
        multiplier: &[Complex64],
        scratch: &mut [Complex64],
    ) {
        self.forward_with_scratch(data, scratch);
        for (z, m) in data.iter_mut().zip(multiplier) {
            *z *= m;
        }
        self.inverse_with_scratch(data, scratch);
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 4.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

/// Riesz fractional derivative `F⁻¹(-|k|^α F(psi))`.
pub fn riesz_apply(psi: &WaveField, alpha: f64) -> Result<WaveField> {
    check_alpha(alpha)?;
    if !psi.is_finite() {
        return Err(Error::NonFinite("riesz_apply input".into()));
    }
    let grid = *psi.grid();
    let multiplier: Vec<Complex64> = grid
        .wavenumbers()
        .into_iter()
        .map(|k| Complex64::new(-abs_pow(k, alpha), 0.0))
        .collect();
    let spectral = Spectral::for_grid(&grid);
    let mut out = psi.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); spectral.scratch_len()];
    spectral.apply_multiplier(out.values_mut(), &multiplier, &mut scratch);
    Ok(out)
}

/// Per-mode kinetic factor `exp(-tau · ½|k|^α)` in FFT order.
pub fn kinetic_phase(grid: &Grid, alpha: f64, tau: Complex64) -> Result<Vec<Complex64>> {
    check_alpha(alpha)?;
    Ok(grid
        .wavenumbers()
        .into_iter()
        .map(|k| (-tau * (0.5 * abs_pow(k, alpha))).exp())
        .collect())
}

/// Apply `H = -½∂^α + V` spectrally.
pub fn apply_hamiltonian(
    psi: &WaveField,
    potential: &[f64],
    alpha: f64,
    spectral: &Spectral,
) -> Result<WaveField> {
    check_alpha(alpha)?;
    let grid = *psi.grid();
    if potential.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: potential.len(),
        });
    }
    let kinetic: Vec<Complex64> = grid
        .wavenumbers()
        .into_iter()
        .map(|k| Complex64::new(0.5 * abs_pow(k, alpha), 0.0))
        .collect();
    let mut out = psi.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); spectral.scratch_len()];
    spectral.apply_multiplier(out.values_mut(), &kinetic, &mut scratch);
    for ((o, p), v) in out.values_mut().iter_mut().zip(psi.values()).zip(potential) {
        *o += p * v;
    }
    Ok(out)
}
