//! Imaginary-time eigensolver with deflation and parity constraints, plus
//! real-time propagation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{abs_pow, check_alpha, Grid, Spectral, WaveField};
use crate::potentials::{sample_potential, symmetry_of_samples, PotentialSpec, Symmetry};
use crate::splitting::{EvolutionMode, Propagator, SplitScheme};

/// Norms below this after deflation or projection mean nothing is left.
const DEGENERATE_NORM: f64 = 1e-10;
/// Largest imaginary mass the real cast may discard.
const REAL_CAST_BUDGET: f64 = 1e-8;
/// Required agreement between the Rayleigh and decay-rate energies.
pub const ESTIMATOR_TOL: f64 = 1e-6;
/// Boundary amplitude, relative to the peak, above which a bound state is
/// flagged as touching the periodic boundary.
pub const BOUNDARY_RATIO: f64 = 1e-8;
const BASIS_ORTHO_TOL: f64 = 1e-8;
const NORM_DRIFT_TOL: f64 = 1e-6;
/// Highest Fourier mode, in units of `dk`, in the random initial state.
const INITIAL_MODES: usize = 10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    #[default]
    None,
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Odd => -1.0,
            _ => 1.0,
        }
    }
}

/// Final stage at a smaller time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refine {
    pub dt_fine: f64,
    pub n_steps: usize,
}

impl Refine {
    /// First stage for discontinuous potentials.
    pub const SHARP: Refine = Refine {
        dt_fine: 1e-3,
        n_steps: 10_000,
    };

    /// Stages for a discontinuous potential on `grid`: [`Refine::SHARP`],
    /// then tenfold smaller steps until `dt · ½k_max^α <= 1`.
    ///
    /// A jump in `V` feeds every Fourier mode, and modes with
    /// `dt · ½|k|^α > 1` sit outside the asymptotic regime of the
    /// splitting, so their share of the fixed point is wrong by O(1). Each
    /// extra stage lasts 1000 of the previous step sizes, so that modes
    /// carrying errors from the previous stage (`½|k|^α ≳ 0.1/dt_prev`)
    /// relax by `e^-100`.
    pub fn sharp_stages(grid: &Grid, alpha: f64) -> Vec<Refine> {
        let t_max = 0.5 * abs_pow(std::f64::consts::PI / grid.dx(), alpha);
        let mut stages = vec![Self::SHARP];
        let mut dt = Self::SHARP.dt_fine;
        while dt * t_max > 1.0 {
            dt /= 10.0;
            stages.push(Refine {
                dt_fine: dt,
                n_steps: 10_000,
            });
        }
        stages
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub alpha: f64,
    pub dt: f64,
    /// Convergence threshold on the per-step sup-norm change.
    pub tol: f64,
    pub max_iters: usize,
    pub parity: Parity,
    /// Previously converged states to project out; must be orthonormal.
    pub deflation_basis: Vec<WaveField>,
    /// Final stages at decreasing time steps, run after convergence.
    pub refine: Vec<Refine>,
    pub seed: u64,
    /// Keep the Rayleigh energy of every iterate in
    /// [`EigenSolution::history`].
    pub record_history: bool,
}

impl SolveConfig {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            dt: 1e-2,
            tol: 1e-12,
            max_iters: 1_000_000,
            parity: Parity::None,
            deflation_basis: Vec::new(),
            refine: Vec::new(),
            seed: 0,
            record_history: false,
        }
    }

    /// Defaults for `spec` on `grid`: the finite well gets
    /// [`Refine::sharp_stages`].
    pub fn for_potential(alpha: f64, spec: &PotentialSpec, grid: &Grid) -> Self {
        let mut cfg = Self::new(alpha);
        if matches!(spec, PotentialSpec::FiniteWell { .. }) {
            cfg.refine = Refine::sharp_stages(grid, alpha);
        }
        cfg
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        let mut prev = self.dt;
        for r in &self.refine {
            if !(r.dt_fine > 0.0 && r.dt_fine < prev) {
                return Err(Error::Config(format!(
                    "refinement steps must decrease from dt, got {} after {prev}",
                    r.dt_fine
                )));
            }
            prev = r.dt_fine;
        }
        for (i, b) in self.deflation_basis.iter().enumerate() {
            if b.grid().len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    actual: b.grid().len(),
                });
            }
            for (j, other) in self.deflation_basis.iter().enumerate().take(i + 1) {
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (b.inner(other) - target).norm();
                if dev > BASIS_ORTHO_TOL {
                    return Err(Error::NonOrthogonal(dev));
                }
            }
        }
        Ok(())
    }
}

/// A converged eigenpair and its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    /// Real, normalized, largest sample positive.
    pub psi: WaveField,
    /// Rayleigh quotient.
    pub energy: f64,
    /// Energy from the norm decay over one step.
    pub energy_decay: f64,
    pub iterations: usize,
    /// `‖Hψ − Eψ‖₂`.
    pub residual: f64,
    pub alpha: f64,
    pub index: usize,
    pub parity: Parity,
    /// Sup-norm change over the last step.
    pub final_change: f64,
    /// Largest boundary sample relative to the peak.
    pub boundary_ratio: f64,
    pub history: Vec<f64>,
}

impl EigenSolution {
    /// Whether the tails still carry weight at the periodic boundary.
    pub fn domain_too_small(&self) -> bool {
        self.boundary_ratio > BOUNDARY_RATIO
    }
}

/// `H = ½|k|^α + V` with its transforms prepared.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Grid,
    spectral: Spectral,
    kinetic: Vec<Complex64>,
    potential: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(grid: &Grid, potential: Vec<f64>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if potential.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: potential.len(),
            });
        }
        let kinetic = grid
            .wavenumbers()
            .into_iter()
            .map(|k| c(0.5 * abs_pow(k, alpha)))
            .collect();
        Ok(Self {
            grid: *grid,
            spectral: Spectral::for_grid(grid),
            kinetic,
            potential,
        })
    }

    pub fn from_spec(spec: &PotentialSpec, grid: &Grid, alpha: f64) -> Result<Self> {
        Self::new(grid, sample_potential(spec, grid)?, alpha)
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn apply(&self, psi: &WaveField) -> Result<WaveField> {
        if psi.grid().len() != self.grid.len() {
            return Err(Error::LengthMismatch {
                expected: self.grid.len(),
                actual: psi.grid().len(),
            });
        }
        let mut out = psi.clone();
        let mut scratch = vec![c(0.0); self.spectral.scratch_len()];
        self.spectral
            .apply_multiplier(out.values_mut(), &self.kinetic, &mut scratch);
        for ((o, p), v) in out
            .values_mut()
            .iter_mut()
            .zip(psi.values())
            .zip(&self.potential)
        {
            *o += p * v;
        }
        Ok(out)
    }

    /// `⟨ψ, Hψ⟩` for normalized `ψ`.
    pub fn rayleigh(&self, psi: &WaveField) -> Result<f64> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(n));
        }
        let e = psi.inner(&self.apply(psi)?);
        if e.im.abs() > 1e-10 * e.re.abs().max(1.0) {
            return Err(Error::Instability(format!(
                "Rayleigh quotient has imaginary part {:e}",
                e.im
            )));
        }
        Ok(e.re)
    }

    pub fn residual(&self, psi: &WaveField, energy: f64) -> Result<f64> {
        let mut r = self.apply(psi)?;
        r.axpy(c(-energy), psi);
        Ok(r.norm())
    }
}

/// Normalized smooth random state built from the lowest Fourier modes.
pub fn initial_state(grid: &Grid, parity: Parity, seed: u64) -> Result<WaveField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64)> = (0..=INITIAL_MODES)
        .map(|m| {
            let w = 1.0 / (1.0 + m as f64);
            let a = rng.gen_range(-1.0..1.0) * w;
            let b = if m == 0 {
                0.0
            } else {
                rng.gen_range(-1.0..1.0) * w
            };
            (a, b)
        })
        .collect();
    let mid = grid.x(grid.len() / 2);
    let dk = grid.dk();
    let psi = WaveField::from_real_fn(*grid, |x| {
        let t = x - mid;
        modes
            .iter()
            .enumerate()
            .map(|(m, (a, b))| {
                let (s, co) = (m as f64 * dk * t).sin_cos();
                a * co + b * s
            })
            .sum()
    });
    project_parity(&psi, parity)
}

fn deflate_in_place(psi: &mut WaveField, basis: &[WaveField]) {
    for _ in 0..2 {
        for b in basis {
            let p = b.inner(psi);
            psi.axpy(-p, b);
        }
    }
}

/// Remove the components of `psi` along `basis` and renormalize.
pub fn deflate(psi: &WaveField, basis: &[WaveField]) -> Result<WaveField> {
    let before = psi.norm();
    let mut out = psi.clone();
    deflate_in_place(&mut out, basis);
    if !(out.norm() >= DEGENERATE_NORM * before.max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate(
            "state lies in the span of the deflation basis".into(),
        ));
    }
    out.normalize()?;
    Ok(out)
}

fn project_in_place(psi: &mut WaveField, parity: Parity) -> Result<()> {
    if parity == Parity::None {
        return Ok(());
    }
    let grid = *psi.grid();
    if !grid.is_symmetric() {
        return Err(Error::InvalidGrid(
            "parity projection needs a grid symmetric about 0".into(),
        ));
    }
    let s = parity.sign();
    let old = psi.values().to_vec();
    for (j, v) in psi.values_mut().iter_mut().enumerate() {
        *v = 0.5 * (old[j] + s * old[grid.mirror_index(j)]);
    }
    Ok(())
}

/// `(ψ(x) ± ψ(−x)) / 2`, renormalized.
pub fn project_parity(psi: &WaveField, parity: Parity) -> Result<WaveField> {
    let before = psi.norm();
    let mut out = psi.clone();
    project_in_place(&mut out, parity)?;
    if !(out.norm() >= DEGENERATE_NORM * before.max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate(format!("no {parity:?} component")));
    }
    out.normalize()?;
    Ok(out)
}

/// `E = −ln(ratio) / dt`.
pub fn energy_decay_rate(norm_ratio: f64, dt: f64) -> Result<f64> {
    if !(norm_ratio > 0.0 && norm_ratio.is_finite()) {
        return Err(Error::Domain(format!("norm ratio {norm_ratio}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt {dt}")));
    }
    Ok(-norm_ratio.ln() / dt)
}

pub fn rayleigh_energy(psi: &WaveField, spec: &PotentialSpec, alpha: f64) -> Result<f64> {
    Hamiltonian::from_spec(spec, psi.grid(), alpha)?.rayleigh(psi)
}

pub fn residual(psi: &WaveField, spec: &PotentialSpec, alpha: f64, energy: f64) -> Result<f64> {
    Hamiltonian::from_spec(spec, psi.grid(), alpha)?.residual(psi, energy)
}

/// Sup-norm distance after removing the global phase between `a` and `b`.
fn aligned_change(prev: &WaveField, next: &WaveField) -> f64 {
    let p = prev.inner(next);
    let phase = if p.norm() > 0.0 { p / p.norm() } else { c(1.0) };
    prev.values()
        .iter()
        .zip(next.values())
        .map(|(a, b)| (b - phase * a).norm())
        .fold(0.0, f64::max)
}

/// Rotate to the global phase with the largest real part, drop the
/// imaginary remainder, and make the largest sample positive.
fn cast_to_real(psi: &WaveField) -> Result<WaveField> {
    let s: Complex64 = psi.values().iter().map(|z| z * z).sum();
    let rot = Complex64::from_polar(1.0, -0.5 * s.arg());
    let total = psi.norm_sqr();
    let mut dropped = 0.0;
    let values: Vec<Complex64> = psi
        .values()
        .iter()
        .map(|z| {
            let w = z * rot;
            dropped += w.im * w.im;
            c(w.re)
        })
        .collect();
    let dropped = dropped * psi.grid().dx() / total;
    if dropped > REAL_CAST_BUDGET {
        return Err(Error::Instability(format!(
            "state is not real up to a phase: imaginary mass {dropped:e} \
             (close to a degenerate partner; a smaller dt shrinks the splitting error)"
        )));
    }
    let mut out = WaveField::new(*psi.grid(), values)?;
    out.normalize()?;
    fix_sign(&mut out);
    Ok(out)
}

/// Make the first sample within a relative 1e-9 of the peak positive, so
/// mirror-image peaks resolve the same way on every run.
pub(crate) fn fix_sign(psi: &mut WaveField) {
    let peak = psi.max_abs();
    if let Some(z) = psi
        .values()
        .iter()
        .find(|z| z.norm() >= peak * (1.0 - 1e-9))
    {
        if z.re < 0.0 {
            psi.scale(c(-1.0));
        }
    }
}

fn boundary_ratio(psi: &WaveField) -> f64 {
    let v = psi.values();
    let n = v.len();
    let edge = v[0]
        .norm()
        .max(v[1].norm())
        .max(v[n - 1].norm())
        .max(v[n - 2].norm());
    edge / psi.max_abs()
}

struct Iteration<'a> {
    basis: &'a [WaveField],
    parity: Parity,
    ham: &'a Hamiltonian,
    history: Option<Vec<f64>>,
}

impl Iteration<'_> {
    /// Step, deflate, project, normalize; returns the un-normalized norm.
    fn advance(&mut self, prop: &Propagator, psi: &mut WaveField) -> Result<f64> {
        prop.step(psi)?;
        deflate_in_place(psi, self.basis);
        project_in_place(psi, self.parity)?;
        let n = psi
            .normalize()
            .map_err(|_| Error::Degenerate("iterate vanished under deflation; reseed".into()))?;
        if let Some(h) = &mut self.history {
            h.push(self.ham.rayleigh(psi)?);
        }
        Ok(n)
    }
}

/// Relax a random state to the lowest eigenstate not excluded by the
/// deflation basis or the parity constraint.
pub fn imaginary_time_solve(
    config: &SolveConfig,
    spec: &PotentialSpec,
    grid: &Grid,
    scheme: &SplitScheme,
) -> Result<EigenSolution> {
    config.validate(grid)?;
    let potential = sample_potential(spec, grid)?;
    if config.parity != Parity::None && symmetry_of_samples(&potential, grid) != Symmetry::Symmetric
    {
        return Err(Error::Config(
            "parity constraint needs an even potential on a symmetric grid".into(),
        ));
    }
    let ham = Hamiltonian::new(grid, potential, config.alpha)?;
    let mut it = Iteration {
        basis: &config.deflation_basis,
        parity: config.parity,
        ham: &ham,
        history: config.record_history.then(Vec::new),
    };

    let mut psi = deflate(
        &initial_state(grid, config.parity, config.seed)?,
        &config.deflation_basis,
    )?;
    let prop = Propagator::new(
        grid,
        scheme,
        ham.potential(),
        config.alpha,
        config.dt,
        EvolutionMode::Imaginary,
    )?;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < config.max_iters {
        let prev = psi.clone();
        it.advance(&prop, &mut psi)?;
        iterations += 1;
        change = aligned_change(&prev, &psi);
        if change < config.tol {
            break;
        }
    }
    if !(change < config.tol) {
        return Err(Error::NoConvergence { iterations, change });
    }

    let mut prop = prop;
    let mut dt = config.dt;
    for r in &config.refine {
        prop = Propagator::new(
            grid,
            scheme,
            ham.potential(),
            config.alpha,
            r.dt_fine,
            EvolutionMode::Imaginary,
        )?;
        dt = r.dt_fine;
        for _ in 0..r.n_steps {
            let prev = psi.clone();
            it.advance(&prop, &mut psi)?;
            change = aligned_change(&prev, &psi);
        }
        iterations += r.n_steps;
    }

    let psi = cast_to_real(&psi)?;
    let energy = ham.rayleigh(&psi)?;
    let mut probe = psi.clone();
    prop.step(&mut probe)?;
    deflate_in_place(&mut probe, &config.deflation_basis);
    project_in_place(&mut probe, config.parity)?;
    let energy_decay = energy_decay_rate(probe.norm(), dt)?;
    if !((energy - energy_decay).abs() < ESTIMATOR_TOL) {
        return Err(Error::EstimatorMismatch {
            rayleigh: energy,
            decay: energy_decay,
        });
    }
    let residual = ham.residual(&psi, energy)?;
    Ok(EigenSolution {
        boundary_ratio: boundary_ratio(&psi),
        psi,
        energy,
        energy_decay,
        iterations,
        residual,
        alpha: config.alpha,
        index: config.deflation_basis.len(),
        parity: config.parity,
        final_change: change,
        history: it.history.unwrap_or_default(),
    })
}

/// Energies closer than this (relative) count as degenerate; the even
/// member is then listed first.
const TIE_TOL: f64 = 1e-9;

/// The lowest `n_states` eigenstates in energy order.
///
/// For even potentials on symmetric grids the even and odd sectors are
/// relaxed separately, each deflated against its own converged states, and
/// merged by energy. Without symmetry each state is deflated against all
/// previous ones.
///
/// ```
/// use fracstep::grid::Grid;
/// use fracstep::potentials::PotentialSpec;
/// use fracstep::solver::{solve_spectrum, SolveConfig};
/// use fracstep::splitting::scheme_sixth;
///
/// let grid = Grid::new(512, -10.0, 10.0)?;
/// let spec = PotentialSpec::Harmonic;
/// let cfg = SolveConfig::for_potential(2.0, &spec, &grid);
/// let states = solve_spectrum(&cfg, &spec, &grid, &scheme_sixth(), 2)?;
/// assert!((states[0].energy - 0.5).abs() < 1e-9);
/// assert!((states[1].energy - 1.5).abs() < 1e-9);
/// # Ok::<(), fracstep::Error>(())
/// ```
pub fn solve_spectrum(
    config: &SolveConfig,
    spec: &PotentialSpec,
    grid: &Grid,
    scheme: &SplitScheme,
    n_states: usize,
) -> Result<Vec<EigenSolution>> {
    if n_states == 0 {
        return Err(Error::Config("n_states must be at least 1".into()));
    }
    let potential = sample_potential(spec, grid)?;
    let sectored = config.parity == Parity::None
        && symmetry_of_samples(&potential, grid) == Symmetry::Symmetric;
    let wrap = |index: usize| {
        move |e: Error| Error::State {
            index,
            source: Box::new(e),
        }
    };

    let mut out: Vec<EigenSolution> = Vec::with_capacity(n_states);
    if !sectored {
        let mut basis = config.deflation_basis.clone();
        for i in 0..n_states {
            let cfg = SolveConfig {
                deflation_basis: basis.clone(),
                seed: config.seed.wrapping_add(i as u64),
                ..config.clone()
            };
            let sol = imaginary_time_solve(&cfg, spec, grid, scheme).map_err(wrap(i))?;
            basis.push(sol.psi.clone());
            out.push(sol);
        }
        out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    } else {
        let solve_in = |parity: Parity, basis: &[WaveField], index: usize| {
            let cfg = SolveConfig {
                parity,
                deflation_basis: config
                    .deflation_basis
                    .iter()
                    .chain(basis)
                    .cloned()
                    .collect(),
                seed: config.seed.wrapping_add(index as u64),
                ..config.clone()
            };
            imaginary_time_solve(&cfg, spec, grid, scheme).map_err(wrap(index))
        };
        let mut even_basis: Vec<WaveField> = Vec::new();
        let mut odd_basis: Vec<WaveField> = Vec::new();
        let mut even = None;
        let mut odd = None;
        while out.len() < n_states {
            let index = out.len();
            if even.is_none() {
                even = Some(solve_in(Parity::Even, &even_basis, index)?);
            }
            if odd.is_none() {
                odd = Some(solve_in(Parity::Odd, &odd_basis, index)?);
            }
            let (e, o) = (even.as_ref().unwrap().energy, odd.as_ref().unwrap().energy);
            let take_even = e <= o + TIE_TOL * e.abs().max(o.abs()).max(1.0);
            let sol = if take_even {
                let s = even.take().unwrap();
                even_basis.push(s.psi.clone());
                s
            } else {
                let s = odd.take().unwrap();
                odd_basis.push(s.psi.clone());
                s
            };
            out.push(sol);
        }
    }
    for (i, s) in out.iter_mut().enumerate() {
        s.index = i;
    }
    Ok(out)
}

/// Unitary evolution `exp(−iHt)` with a real-coefficient scheme.
pub fn real_time_propagate(
    psi: &WaveField,
    spec: &PotentialSpec,
    alpha: f64,
    dt: f64,
    n_steps: usize,
    scheme: &SplitScheme,
) -> Result<WaveField> {
    real_time_propagate_observed(
        psi,
        spec,
        alpha,
        dt,
        n_steps,
        scheme,
        n_steps.max(1),
        |_, _| {},
    )
}

/// As [`real_time_propagate`], calling `observe(step, ψ)` at step 0 and
/// every `every` steps thereafter.
#[allow(clippy::too_many_arguments)]
pub fn real_time_propagate_observed(
    psi: &WaveField,
    spec: &PotentialSpec,
    alpha: f64,
    dt: f64,
    n_steps: usize,
    scheme: &SplitScheme,
    every: usize,
    mut observe: impl FnMut(usize, &WaveField),
) -> Result<WaveField> {
    if !scheme.is_real() {
        return Err(Error::InvalidScheme(format!(
            "{} has complex coefficients; real-time evolution needs a real scheme",
            scheme.name()
        )));
    }
    if every == 0 {
        return Err(Error::Config(
            "observation interval must be positive".into(),
        ));
    }
    let grid = *psi.grid();
    let potential = sample_potential(spec, &grid)?;
    let prop = Propagator::new(&grid, scheme, &potential, alpha, dt, EvolutionMode::Real)?;
    let n0 = psi.norm();
    let mut out = psi.clone();
    observe(0, &out);
    let mut done = 0;
    while done < n_steps {
        let chunk = every.min(n_steps - done);
        prop.advance(&mut out, chunk)?;
        done += chunk;
        let drift = (out.norm() - n0).abs() / n0;
        if drift > NORM_DRIFT_TOL {
            return Err(Error::NormDrift(drift));
        }
        observe(done, &out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use crate::splitting::{scheme_sixth, scheme_strang};

    fn ring() -> Grid {
        Grid::new(480, -1.0, 1.0).unwrap()
    }

    #[test]
    fn initial_state_parity_and_determinism() {
        let g = ring();
        let a = initial_state(&g, Parity::Even, 7).unwrap();
        let b = initial_state(&g, Parity::Even, 7).unwrap();
        assert_eq!(a, b);
        for j in 0..g.len() {
            assert!((a.values()[j] - a.values()[g.mirror_index(j)]).norm() < 1e-12);
        }
        let odd = initial_state(&g, Parity::Odd, 7).unwrap();
        let constant = WaveField::from_real_fn(g, |_| 1.0).normalized().unwrap();
        assert!(odd.inner(&constant).norm() < 1e-14);
        assert!((odd.norm() - 1.0).abs() < 1e-12);
        assert_ne!(
            initial_state(&g, Parity::None, 8).unwrap(),
            initial_state(&g, Parity::None, 9).unwrap()
        );
    }

    #[test]
    fn deflation() {
        let g = ring();
        let b0 = WaveField::from_real_fn(g, |x| (PI * x).cos())
            .normalized()
            .unwrap();
        let same = deflate(&b0, &[]).unwrap();
        assert!(same.sup_distance(&b0) < 1e-15);
        let mut near = b0.clone();
        near.axpy(
            c(1e-3),
            &WaveField::from_real_fn(g, |x| (2.0 * PI * x).sin()),
        );
        let out = deflate(&near, std::slice::from_ref(&b0)).unwrap();
        assert!(out.inner(&b0).norm() < 1e-12);
        assert!((out.norm() - 1.0).abs() < 1e-12);
        assert!(matches!(
            deflate(&b0, std::slice::from_ref(&b0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn parity_projection() {
        let g = ring();
        let cos = WaveField::from_real_fn(g, |x| (PI * x).cos())
            .normalized()
            .unwrap();
        assert!(
            project_parity(&cos, Parity::Even)
                .unwrap()
                .sup_distance(&cos)
                < 1e-14
        );
        let sin = WaveField::from_real_fn(g, |x| (PI * x).sin());
        assert!(matches!(
            project_parity(&sin, Parity::Even),
            Err(Error::Degenerate(_))
        ));
        let mixed = WaveField::from_real_fn(g, |x| (PI * x).sin() + 0.3 * (3.0 * PI * x).cos());
        let once = project_parity(&mixed, Parity::Odd).unwrap();
        let twice = project_parity(&once, Parity::Odd).unwrap();
        assert!(once.sup_distance(&twice) < 1e-14);
    }

    #[test]
    fn decay_rate_inversion() {
        assert!((energy_decay_rate((-0.5e-2f64).exp(), 1e-2).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(energy_decay_rate(1.0, 1e-2).unwrap(), 0.0);
        assert!(energy_decay_rate(0.0, 1e-2).is_err());
        assert!(energy_decay_rate(-1.0, 1e-2).is_err());
    }

    #[test]
    fn rayleigh_values() {
        let g = ring();
        let cos = WaveField::from_real_fn(g, |x| (PI * x).cos())
            .normalized()
            .unwrap();
        let e = rayleigh_energy(&cos, &PotentialSpec::RingZero, 2.0).unwrap();
        assert!((e - 0.5 * PI * PI).abs() < 1e-12);
        let e = rayleigh_energy(&cos, &PotentialSpec::RingZero, 1.8).unwrap();
        assert!((e - 0.5 * PI.powf(1.8)).abs() < 1e-12);
        let h = Grid::new(2000, -10.0, 10.0).unwrap();
        let gauss = WaveField::from_real_fn(h, |x| (-x * x / 2.0).exp())
            .normalized()
            .unwrap();
        let e = rayleigh_energy(&gauss, &PotentialSpec::Harmonic, 2.0).unwrap();
        assert!((e - 0.5).abs() < 1e-10, "{e}");
        let unnormalized = WaveField::from_real_fn(g, |x| 2.0 * (PI * x).cos());
        assert!(matches!(
            rayleigh_energy(&unnormalized, &PotentialSpec::RingZero, 2.0),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn harmonic_ground_state() {
        let g = Grid::new(2000, -10.0, 10.0).unwrap();
        let cfg = SolveConfig {
            parity: Parity::Even,
            record_history: true,
            ..SolveConfig::new(2.0)
        };
        let sol =
            imaginary_time_solve(&cfg, &PotentialSpec::Harmonic, &g, &scheme_sixth()).unwrap();
        assert!((sol.energy - 0.5).abs() < 1e-7, "{}", sol.energy);
        assert!((sol.energy_decay - 0.5).abs() < 1e-7);
        assert!(sol.residual < 1e-6);
        assert!(!sol.domain_too_small());
        assert!(sol.psi.values()[1000].re > 0.0);
        for w in sol.history[100..].windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
    }

    #[test]
    fn ring_sectors_merge_with_even_first() {
        let cfg = SolveConfig::new(2.0);
        let sols =
            solve_spectrum(&cfg, &PotentialSpec::RingZero, &ring(), &scheme_sixth(), 5).unwrap();
        let expect = [
            0.0,
            0.5 * PI * PI,
            0.5 * PI * PI,
            2.0 * PI * PI,
            2.0 * PI * PI,
        ];
        let parities = [
            Parity::Even,
            Parity::Even,
            Parity::Odd,
            Parity::Even,
            Parity::Odd,
        ];
        for ((s, e), p) in sols.iter().zip(expect).zip(parities) {
            assert!(
                (s.energy - e).abs() <= 1e-8 * e.max(1.0),
                "{} vs {e}",
                s.energy
            );
            assert_eq!(s.parity, p);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let g = ring();
        let mut cfg = SolveConfig::new(2.0);
        cfg.dt = 0.0;
        assert!(imaginary_time_solve(&cfg, &PotentialSpec::RingZero, &g, &scheme_sixth()).is_err());
        let mut cfg = SolveConfig::new(2.0);
        cfg.refine = vec![Refine {
            dt_fine: 0.1,
            n_steps: 1,
        }];
        assert!(matches!(
            imaginary_time_solve(&cfg, &PotentialSpec::RingZero, &g, &scheme_sixth()),
            Err(Error::Config(_))
        ));
        let mut cfg = SolveConfig::new(2.0);
        cfg.max_iters = 3;
        assert!(matches!(
            imaginary_time_solve(&cfg, &PotentialSpec::Harmonic, &g, &scheme_sixth()),
            Err(Error::NoConvergence { iterations: 3, .. })
        ));
        let mut cfg = SolveConfig::new(2.0);
        let b = WaveField::from_real_fn(g, |x| 2.0 * (PI * x).cos());
        cfg.deflation_basis = vec![b];
        assert!(matches!(
            imaginary_time_solve(&cfg, &PotentialSpec::RingZero, &g, &scheme_sixth()),
            Err(Error::NonOrthogonal(_))
        ));
        assert!(solve_spectrum(
            &SolveConfig::new(2.0),
            &PotentialSpec::RingZero,
            &g,
            &scheme_sixth(),
            0
        )
        .is_err());
    }

    #[test]
    fn real_time_plane_wave_and_policy() {
        let g = ring();
        let k = 3.0 * PI;
        let psi = WaveField::from_fn(g, |x| Complex64::from_polar(1.0, k * x))
            .normalized()
            .unwrap();
        let (dt, n) = (1e-3, 200);
        let out = real_time_propagate(&psi, &PotentialSpec::RingZero, 1.8, dt, n, &scheme_strang())
            .unwrap();
        let phase = Complex64::from_polar(1.0, -0.5 * k.powf(1.8) * dt * n as f64);
        let mut expect = psi.clone();
        expect.scale(phase);
        assert!(out.sup_distance(&expect) < 1e-10);
        assert!(matches!(
            real_time_propagate(&psi, &PotentialSpec::RingZero, 1.8, dt, n, &scheme_sixth()),
            Err(Error::InvalidScheme(_))
        ));
    }
}
