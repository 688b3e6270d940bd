//! Closed-form references, error metrics, a dense-matrix oracle, and the
//! derived quantities: bound-state counts, tails, tunneling.

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, WaveField};
use crate::potentials::{sample_potential, symmetry_of_samples, PotentialSpec, Symmetry};
use crate::solver::{fix_sign, EigenSolution, Hamiltonian};

/// Largest grid accepted by [`dense_oracle_eigen`].
pub const DENSE_LIMIT: usize = 1024;
/// Samples below this magnitude are rounding noise in tail analysis.
pub const TAIL_FLOOR: f64 = 1e-13;
/// Bound states this close to the threshold are reported as marginal.
pub const MARGINAL_TOL: f64 = 1e-6;
const OVERLAP_FLOOR: f64 = 1e-8;
const ORTHO_TOL: f64 = 1e-8;
/// Relative energy spread treated as a degenerate cluster by the oracle.
const CLUSTER_TOL: f64 = 1e-9;

/// Mode number `⌈n/2⌉` of the `n`-th ring state.
pub fn ring_mode(n: usize) -> usize {
    n.div_ceil(2)
}

/// `½(π⌈n/2⌉)^α`: ring of circumference 2.
pub fn ring_analytic_energy(n: usize, alpha: f64) -> f64 {
    0.5 * (PI * ring_mode(n) as f64).powf(alpha)
}

/// Normalized ring eigenstate: the constant for `n = 0`, then `cos(k_m x)`
/// for odd `n` and `sin(k_m x)` for even `n`, with `k_m = 2πm/L`.
/// Within each degenerate pair the even member comes first.
pub fn ring_analytic_state(n: usize, grid: &Grid) -> Result<WaveField> {
    let m = ring_mode(n);
    if 2 * m >= grid.len() / 2 {
        return Err(Error::Nyquist {
            mode: m,
            n: grid.len(),
        });
    }
    let k = m as f64 * grid.dk();
    let f = move |x: f64| {
        if n == 0 {
            1.0
        } else if n % 2 == 1 {
            (k * x).cos()
        } else {
            (k * x).sin()
        }
    };
    WaveField::from_real_fn(*grid, f).normalized()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub pointwise: Vec<f64>,
    pub max_pointwise: f64,
    pub energy_error: f64,
    pub index: usize,
    pub alpha: f64,
}

impl ErrorReport {
    pub fn labeled(mut self, index: usize, alpha: f64) -> Self {
        self.index = index;
        self.alpha = alpha;
        self
    }
}

/// Pointwise and energy errors of `num` against `reference` after
/// aligning the sign. The report is unlabeled (`index = 0`, `alpha = NaN`)
/// until [`ErrorReport::labeled`] is called.
pub fn compare_state(
    num: &WaveField,
    reference: &WaveField,
    e_num: f64,
    e_ref: f64,
) -> Result<ErrorReport> {
    if num.grid().len() != reference.grid().len() {
        return Err(Error::LengthMismatch {
            expected: reference.grid().len(),
            actual: num.grid().len(),
        });
    }
    let overlap = reference.inner(num).re;
    if overlap.abs() < OVERLAP_FLOOR {
        return Err(Error::ZeroOverlap);
    }
    let s = overlap.signum();
    let pointwise: Vec<f64> = num
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (s * a - b).norm())
        .collect();
    let max_pointwise = pointwise.iter().copied().fold(0.0, f64::max);
    Ok(ErrorReport {
        pointwise,
        max_pointwise,
        energy_error: (e_num - e_ref).abs(),
        index: 0,
        alpha: f64::NAN,
    })
}

/// The discretized Hamiltonian as a dense symmetric matrix, built by
/// applying the spectral operator to each unit vector.
pub fn dense_hamiltonian(spec: &PotentialSpec, grid: &Grid, alpha: f64) -> Result<DMatrix<f64>> {
    let n = grid.len();
    if n > DENSE_LIMIT {
        return Err(Error::SizeGuard {
            n,
            limit: DENSE_LIMIT,
        });
    }
    let ham = Hamiltonian::from_spec(spec, grid, alpha)?;
    let mut h = DMatrix::<f64>::zeros(n, n);
    let mut unit = WaveField::zeros(*grid);
    for j in 0..n {
        unit.values_mut()[j] = Complex64::new(1.0, 0.0);
        let col = ham.apply(&unit)?;
        for (i, z) in col.values().iter().enumerate() {
            h[(i, j)] = z.re;
        }
        unit.values_mut()[j] = Complex64::new(0.0, 0.0);
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// All eigenvalues of the dense Hamiltonian, ascending.
pub fn dense_oracle_energies(spec: &PotentialSpec, grid: &Grid, alpha: f64) -> Result<Vec<f64>> {
    let h = dense_hamiltonian(spec, grid, alpha)?;
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Lowest `n_states` eigenpairs of the dense Hamiltonian.
///
/// States are normalized with the `dx` weight and sign-fixed like solver
/// output. For even potentials, degenerate clusters are rotated into
/// parity eigenstates with the even members first.
pub fn dense_oracle_eigen(
    spec: &PotentialSpec,
    grid: &Grid,
    alpha: f64,
    n_states: usize,
) -> Result<Vec<(f64, WaveField)>> {
    let h = dense_hamiltonian(spec, grid, alpha)?;
    let n = grid.len();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = 1.0 / grid.dx().sqrt();
    let column = |j: usize| -> Vec<f64> {
        eig.eigenvectors
            .column(j)
            .iter()
            .map(|v| v * scale)
            .collect()
    };
    let mut energies: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vectors: Vec<Vec<f64>> = Vec::new();

    let symmetric =
        symmetry_of_samples(&sample_potential(spec, grid)?, grid) == Symmetry::Symmetric;
    // extend past n_states so a cluster straddling the cut is resolved whole
    let mut i = 0;
    while i < n_states.min(n) {
        let mut end = i + 1;
        while end < n
            && (energies[end] - energies[i]).abs() <= CLUSTER_TOL * energies[i].abs().max(1.0)
        {
            end += 1;
        }
        let cluster: Vec<Vec<f64>> = order[i..end].iter().map(|&j| column(j)).collect();
        if symmetric && cluster.len() > 1 {
            let (e, v) = resolve_parity(&cluster, &energies[i..end], grid);
            energies[i..end].copy_from_slice(&e);
            vectors.extend(v);
        } else {
            vectors.extend(cluster);
        }
        i = end;
    }
    vectors.truncate(n_states);
    vectors
        .into_iter()
        .zip(energies)
        .map(|(v, e)| {
            let mut psi = WaveField::new(
                *grid,
                v.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
            )?;
            fix_sign(&mut psi);
            Ok((e, psi))
        })
        .collect()
}

/// Diagonalize the parity operator inside a degenerate cluster.
fn resolve_parity(
    cluster: &[Vec<f64>],
    energies: &[f64],
    grid: &Grid,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = cluster.len();
    let dx = grid.dx();
    let mirror =
        |v: &[f64]| -> Vec<f64> { (0..v.len()).map(|j| v[grid.mirror_index(j)]).collect() };
    let mut p = DMatrix::<f64>::zeros(m, m);
    for a in 0..m {
        let pa = mirror(&cluster[a]);
        for b in 0..m {
            p[(b, a)] = cluster[b].iter().zip(&pa).map(|(x, y)| x * y).sum::<f64>() * dx;
        }
    }
    let p = (&p + p.transpose()) * 0.5;
    let eig = SymmetricEigen::new(p);
    // parity +1 first
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mean = energies.iter().sum::<f64>() / m as f64;
    let vectors = idx
        .iter()
        .map(|&r| {
            let coef = eig.eigenvectors.column(r);
            let mut v = vec![0.0; cluster[0].len()];
            for (c, basis) in coef.iter().zip(cluster) {
                for (o, b) in v.iter_mut().zip(basis) {
                    *o += c * b;
                }
            }
            v
        })
        .collect();
    (vec![mean; m], vectors)
}

/// Result of counting states below the finite-well threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCount {
    pub count: usize,
    /// Bound energies within [`MARGINAL_TOL`] of the threshold.
    pub marginal: Vec<f64>,
}

/// Number of dense-oracle eigenvalues strictly below `v0`.
pub fn count_bound_states(alpha: f64, spec: &PotentialSpec, grid: &Grid) -> Result<BoundCount> {
    let PotentialSpec::FiniteWell { v0, .. } = *spec else {
        return Err(Error::Config(format!(
            "bound-state counting needs a finite well, got {}",
            spec.name()
        )));
    };
    let energies = dense_oracle_energies(spec, grid, alpha)?;
    let bound: Vec<f64> = energies.into_iter().filter(|&e| e < v0).collect();
    Ok(BoundCount {
        count: bound.len(),
        marginal: bound
            .into_iter()
            .filter(|&e| v0 - e <= MARGINAL_TOL)
            .collect(),
    })
}

/// `ln|ψ|` and its slope across the classically forbidden zone to the right
/// of the peak.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    pub region: Range<usize>,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub log_abs: Vec<f64>,
    pub local_slope: Vec<f64>,
}

impl TailFit {
    /// Slope at the region sample nearest to `x`.
    pub fn slope_at(&self, x: f64) -> Option<f64> {
        let dx = self.xs.get(1).map(|b| b - self.xs[0])?;
        let j = ((x - self.xs[0]) / dx).round();
        if j < 0.0 {
            return None;
        }
        self.local_slope.get(j as usize).copied()
    }

    /// Sign changes of `ψ` inside the region.
    pub fn nodes(&self) -> usize {
        self.values.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
    }
}

/// Forbidden zone of a bound state: from the first sample right of the
/// peak with `V > E`, outward until `|ψ|` reaches the noise floor.
pub fn extract_tail(sol: &EigenSolution, spec: &PotentialSpec) -> Result<TailFit> {
    let grid = *sol.psi.grid();
    let v = sample_potential(spec, &grid)?;
    let psi: Vec<f64> = sol.psi.values().iter().map(|z| z.re).collect();
    let peak = psi
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bj, bv), (j, x)| {
            if x.abs() > bv {
                (j, x.abs())
            } else {
                (bj, bv)
            }
        })
        .0;
    let start = (peak..grid.len())
        .find(|&j| v[j] > sol.energy)
        .ok_or(Error::NoForbiddenRegion)?;
    let end = (start..grid.len())
        .find(|&j| psi[j].abs() < TAIL_FLOOR)
        .unwrap_or(grid.len());
    if end - start < 2 {
        return Err(Error::NoForbiddenRegion);
    }
    let region = start..end;
    let xs: Vec<f64> = region.clone().map(|j| grid.x(j)).collect();
    let values: Vec<f64> = psi[region.clone()].to_vec();
    let log_abs: Vec<f64> = values.iter().map(|x| x.abs().ln()).collect();
    let dx = grid.dx();
    let m = log_abs.len();
    let local_slope = (0..m)
        .map(|i| match i {
            0 => (log_abs[1] - log_abs[0]) / dx,
            i if i == m - 1 => (log_abs[i] - log_abs[i - 1]) / dx,
            i => (log_abs[i + 1] - log_abs[i - 1]) / (2.0 * dx),
        })
        .collect();
    Ok(TailFit {
        region,
        xs,
        values,
        log_abs,
        local_slope,
    })
}

/// `|E₁ − E₀| / 2π`.
pub fn tunneling_frequency(e0: f64, e1: f64) -> f64 {
    (e1 - e0).abs() / (2.0 * PI)
}

/// `(ψ_L, ψ_R) = ((ψ₊ − ψ₋)/√2, (ψ₊ + ψ₋)/√2)`, with `ψ₋` first oriented
/// so that it is positive on the right.
pub fn left_right_superpositions(
    psi_plus: &WaveField,
    psi_minus: &WaveField,
) -> Result<(WaveField, WaveField)> {
    let overlap = psi_plus.inner(psi_minus).norm();
    if overlap > ORTHO_TOL {
        return Err(Error::NonOrthogonal(overlap));
    }
    let grid = *psi_minus.grid();
    let weight: f64 = psi_minus
        .values()
        .iter()
        .enumerate()
        .map(|(j, z)| z.re * grid.x(j).signum())
        .sum();
    let s = if weight < 0.0 { -1.0 } else { 1.0 };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut left = psi_plus.clone();
    left.scale(Complex64::new(h, 0.0));
    left.axpy(Complex64::new(-s * h, 0.0), psi_minus);
    let mut right = psi_plus.clone();
    right.scale(Complex64::new(h, 0.0));
    right.axpy(Complex64::new(s * h, 0.0), psi_minus);
    Ok((left.normalized()?, right.normalized()?))
}

/// Probability on `x < 0` and `x > 0`; a sample at `x = 0` is split evenly.
pub fn well_masses(psi: &WaveField) -> (f64, f64) {
    let grid = psi.grid();
    let dx = grid.dx();
    let mut left = 0.0;
    let mut right = 0.0;
    for (j, z) in psi.values().iter().enumerate() {
        let p = z.norm_sqr() * dx;
        let x = grid.x(j);
        if x < 0.0 {
            left += p;
        } else if x > 0.0 {
            right += p;
        } else {
            left += 0.5 * p;
            right += 0.5 * p;
        }
    }
    (left, right)
}
