//! C interface to `fracstep`.
//!
//! Objects are opaque handles created by `fs_*_new`/`fs_solve_spectrum` and
//! released with the matching `fs_*_free`. Every fallible call returns an
//! `FsStatus`; on failure [`fs_last_error`] describes what went wrong on the
//! calling thread. Panics are caught at the boundary and reported as
//! [`FS_PANIC`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use fracstep::analysis::count_bound_states;
use fracstep::grid::Grid;
use fracstep::mittag_leffler::{mittag_leffler, MlParams};
use fracstep::potentials::PotentialSpec;
use fracstep::solver::{solve_spectrum, EigenSolution, Parity, Refine, SolveConfig};
use fracstep::splitting::SplitScheme;

pub type FsStatus = i32;

pub const FS_OK: FsStatus = 0;
pub const FS_NULL_POINTER: FsStatus = 1;
/// Bad grid, order, options or potential data.
pub const FS_INVALID_ARGUMENT: FsStatus = 2;
/// The solver or series evaluation failed to meet its accuracy checks.
pub const FS_SOLVER_FAILURE: FsStatus = 3;
pub const FS_OUT_OF_RANGE: FsStatus = 4;
pub const FS_BUFFER_TOO_SMALL: FsStatus = 5;
pub const FS_PANIC: FsStatus = 6;

pub const FS_POTENTIAL_RING: i32 = 0;
pub const FS_POTENTIAL_HARMONIC: i32 = 1;
pub const FS_POTENTIAL_FINITE_WELL: i32 = 2;
pub const FS_POTENTIAL_DOUBLE_WELL: i32 = 3;

pub const FS_SCHEME_LIE: i32 = 0;
pub const FS_SCHEME_STRANG: i32 = 1;
pub const FS_SCHEME_SIXTH: i32 = 2;

pub const FS_PARITY_NONE: i32 = 0;
pub const FS_PARITY_EVEN: i32 = 1;
pub const FS_PARITY_ODD: i32 = 2;

/// Refinement stages chosen by potential (finite well: cascade).
pub const FS_REFINE_DEFAULT: i32 = 0;
pub const FS_REFINE_OFF: i32 = 1;
/// One stage at `refine_dt` for `refine_steps` steps.
pub const FS_REFINE_SINGLE: i32 = 2;

/// Periodic grid.
pub struct FsGrid(Grid);

/// Potential description.
pub struct FsPotential(PotentialSpec);

/// Converged eigenstates in energy order.
pub struct FsSpectrum {
    states: Vec<EigenSolution>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsSolveOptions {
    pub alpha: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub scheme: i32,
    pub parity: i32,
    pub refine: i32,
    pub refine_dt: f64,
    pub refine_steps: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsStateInfo {
    pub energy: f64,
    pub energy_decay: f64,
    pub residual: f64,
    pub iterations: usize,
    pub parity: i32,
    pub boundary_ratio: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

enum Failure {
    Null(&'static str),
    Range(String),
    Buffer { need: usize, got: usize },
    Invalid(String),
    Lib(fracstep::Error),
}

impl From<fracstep::Error> for Failure {
    fn from(e: fracstep::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn status(&self) -> FsStatus {
        match self {
            Failure::Null(_) => FS_NULL_POINTER,
            Failure::Range(_) => FS_OUT_OF_RANGE,
            Failure::Buffer { .. } => FS_BUFFER_TOO_SMALL,
            Failure::Invalid(_) => FS_INVALID_ARGUMENT,
            Failure::Lib(e) if e.is_config() => FS_INVALID_ARGUMENT,
            Failure::Lib(_) => FS_SOLVER_FAILURE,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Null(what) => format!("{what} is null"),
            Failure::Range(m) | Failure::Invalid(m) => m.clone(),
            Failure::Buffer { need, got } => format!("buffer holds {got} values, need {need}"),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            FS_OK
        }
        Ok(Err(failure)) => {
            set_last_error(&failure.message());
            failure.status()
        }
        Err(_) => {
            set_last_error("panic inside fracstep");
            FS_PANIC
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn store<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `fs_*` call on the same thread.
#[no_mangle]
pub extern "C" fn fs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Defaults for order `alpha`: `dt = 1e-2`, `tol = 1e-12`, sixth-order
/// scheme, no parity constraint, potential-dependent refinement.
#[no_mangle]
pub extern "C" fn fs_solve_options_default(alpha: f64) -> FsSolveOptions {
    let cfg = SolveConfig::new(alpha);
    FsSolveOptions {
        alpha,
        dt: cfg.dt,
        tol: cfg.tol,
        max_iters: cfg.max_iters,
        seed: cfg.seed,
        scheme: FS_SCHEME_SIXTH,
        parity: FS_PARITY_NONE,
        refine: FS_REFINE_DEFAULT,
        refine_dt: Refine::SHARP.dt_fine,
        refine_steps: Refine::SHARP.n_steps,
    }
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_grid_new(
    n_points: usize,
    x_min: f64,
    x_max: f64,
    out: *mut *mut FsGrid,
) -> FsStatus {
    guard(|| {
        let grid = Grid::new(n_points, x_min, x_max)?;
        store(out, Box::into_raw(Box::new(FsGrid(grid))), "out")
    })
}

/// # Safety
/// `grid` must be null or a handle from [`fs_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_grid_free(grid: *mut FsGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// # Safety
/// `grid` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_grid_len(grid: *const FsGrid, out: *mut usize) -> FsStatus {
    guard(|| store(out, deref(grid, "grid")?.0.len(), "out"))
}

/// Copy the sample positions into `xs[0..len]`.
///
/// # Safety
/// `grid` must be a live handle; `xs` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_grid_points(grid: *const FsGrid, xs: *mut f64, len: usize) -> FsStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        if xs.is_null() {
            return Err(Failure::Null("xs"));
        }
        if len < g.len() {
            return Err(Failure::Buffer {
                need: g.len(),
                got: len,
            });
        }
        let dst = std::slice::from_raw_parts_mut(xs, g.len());
        for (j, x) in dst.iter_mut().enumerate() {
            *x = g.x(j);
        }
        Ok(())
    })
}

/// One of the built-in potentials with its standard parameters.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_potential_builtin(kind: i32, out: *mut *mut FsPotential) -> FsStatus {
    guard(|| {
        let spec = match kind {
            FS_POTENTIAL_RING => PotentialSpec::RingZero,
            FS_POTENTIAL_HARMONIC => PotentialSpec::Harmonic,
            FS_POTENTIAL_FINITE_WELL => PotentialSpec::default_finite_well(),
            FS_POTENTIAL_DOUBLE_WELL => PotentialSpec::default_double_well(),
            other => return Err(Failure::Invalid(format!("unknown potential kind {other}"))),
        };
        store(out, Box::into_raw(Box::new(FsPotential(spec))), "out")
    })
}

/// Finite well of depth `v0` on `|x| < half_width`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_potential_finite_well(
    v0: f64,
    half_width: f64,
    out: *mut *mut FsPotential,
) -> FsStatus {
    guard(|| {
        let spec = PotentialSpec::finite_well(v0, half_width)?;
        store(out, Box::into_raw(Box::new(FsPotential(spec))), "out")
    })
}

/// Samples `values[j] = V(xs[j])`; solving requires a grid whose points
/// match `xs`.
///
/// # Safety
/// `xs` and `values` must be readable for `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_potential_tabulated(
    xs: *const f64,
    values: *const f64,
    len: usize,
    out: *mut *mut FsPotential,
) -> FsStatus {
    guard(|| {
        if xs.is_null() {
            return Err(Failure::Null("xs"));
        }
        if values.is_null() {
            return Err(Failure::Null("values"));
        }
        let xs = std::slice::from_raw_parts(xs, len).to_vec();
        let values = std::slice::from_raw_parts(values, len).to_vec();
        let spec = PotentialSpec::tabulated(xs, values)?;
        store(out, Box::into_raw(Box::new(FsPotential(spec))), "out")
    })
}

/// # Safety
/// `potential` must be null or a live potential handle.
#[no_mangle]
pub unsafe extern "C" fn fs_potential_free(potential: *mut FsPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

fn solve_config(
    opts: &FsSolveOptions,
    spec: &PotentialSpec,
    grid: &Grid,
) -> Result<(SolveConfig, SplitScheme), Failure> {
    let scheme = match opts.scheme {
        FS_SCHEME_LIE => SplitScheme::lie(),
        FS_SCHEME_STRANG => SplitScheme::strang(),
        FS_SCHEME_SIXTH => SplitScheme::sixth(),
        other => return Err(Failure::Invalid(format!("unknown scheme {other}"))),
    };
    let parity = match opts.parity {
        FS_PARITY_NONE => Parity::None,
        FS_PARITY_EVEN => Parity::Even,
        FS_PARITY_ODD => Parity::Odd,
        other => return Err(Failure::Invalid(format!("unknown parity {other}"))),
    };
    let mut cfg = SolveConfig::for_potential(opts.alpha, spec, grid);
    cfg.dt = opts.dt;
    cfg.tol = opts.tol;
    cfg.max_iters = opts.max_iters;
    cfg.seed = opts.seed;
    cfg.parity = parity;
    match opts.refine {
        FS_REFINE_DEFAULT => cfg.refine.retain(|r| r.dt_fine < opts.dt),
        FS_REFINE_OFF => cfg.refine.clear(),
        FS_REFINE_SINGLE => {
            cfg.refine = vec![Refine {
                dt_fine: opts.refine_dt,
                n_steps: opts.refine_steps,
            }]
        }
        other => return Err(Failure::Invalid(format!("unknown refine mode {other}"))),
    }
    Ok((cfg, scheme))
}

/// Solve for the `n_states` lowest eigenstates. On success `*out` owns the
/// result and must be released with [`fs_spectrum_free`].
///
/// # Safety
/// `potential`, `grid` and `options` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_solve_spectrum(
    potential: *const FsPotential,
    grid: *const FsGrid,
    options: *const FsSolveOptions,
    n_states: usize,
    out: *mut *mut FsSpectrum,
) -> FsStatus {
    guard(|| {
        let spec = &deref(potential, "potential")?.0;
        let grid = &deref(grid, "grid")?.0;
        let opts = deref(options, "options")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let (cfg, scheme) = solve_config(opts, spec, grid)?;
        let states = solve_spectrum(&cfg, spec, grid, &scheme, n_states)?;
        store(out, Box::into_raw(Box::new(FsSpectrum { states })), "out")
    })
}

/// # Safety
/// `spectrum` must be null or a handle from [`fs_solve_spectrum`].
#[no_mangle]
pub unsafe extern "C" fn fs_spectrum_free(spectrum: *mut FsSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// # Safety
/// `spectrum` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_spectrum_len(spectrum: *const FsSpectrum, out: *mut usize) -> FsStatus {
    guard(|| store(out, deref(spectrum, "spectrum")?.states.len(), "out"))
}

unsafe fn state_at<'a>(
    spectrum: *const FsSpectrum,
    index: usize,
) -> Result<&'a EigenSolution, Failure> {
    let s = deref(spectrum, "spectrum")?;
    s.states
        .get(index)
        .ok_or_else(|| Failure::Range(format!("state {index} of {}", s.states.len())))
}

/// # Safety
/// `spectrum` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_spectrum_energy(
    spectrum: *const FsSpectrum,
    index: usize,
    out: *mut f64,
) -> FsStatus {
    guard(|| store(out, state_at(spectrum, index)?.energy, "out"))
}

/// # Safety
/// `spectrum` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_spectrum_info(
    spectrum: *const FsSpectrum,
    index: usize,
    out: *mut FsStateInfo,
) -> FsStatus {
    guard(|| {
        let s = state_at(spectrum, index)?;
        let info = FsStateInfo {
            energy: s.energy,
            energy_decay: s.energy_decay,
            residual: s.residual,
            iterations: s.iterations,
            parity: match s.parity {
                Parity::None => FS_PARITY_NONE,
                Parity::Even => FS_PARITY_EVEN,
                Parity::Odd => FS_PARITY_ODD,
            },
            boundary_ratio: s.boundary_ratio,
        };
        store(out, info, "out")
    })
}

/// Copy the (real, normalized) state `index` into `psi[0..len]`.
///
/// # Safety
/// `spectrum` must be live; `psi` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_spectrum_state(
    spectrum: *const FsSpectrum,
    index: usize,
    psi: *mut f64,
    len: usize,
) -> FsStatus {
    guard(|| {
        let s = state_at(spectrum, index)?;
        if psi.is_null() {
            return Err(Failure::Null("psi"));
        }
        let values = s.psi.values();
        if len < values.len() {
            return Err(Failure::Buffer {
                need: values.len(),
                got: len,
            });
        }
        let dst = std::slice::from_raw_parts_mut(psi, values.len());
        for (d, z) in dst.iter_mut().zip(values) {
            *d = z.re;
        }
        Ok(())
    })
}

/// Number of finite-well states below the barrier, from dense
/// diagonalization (grids of at most 1024 points).
///
/// # Safety
/// `potential` must be a live finite-well handle, `grid` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_count_bound_states(
    potential: *const FsPotential,
    grid: *const FsGrid,
    alpha: f64,
    out: *mut usize,
) -> FsStatus {
    guard(|| {
        let spec = &deref(potential, "potential")?.0;
        let grid = &deref(grid, "grid")?.0;
        let count = count_bound_states(alpha, spec, grid)?;
        store(out, count.count, "out")
    })
}

/// `E_{q,β}(x)` and its estimated absolute error. `error` may be null.
///
/// # Safety
/// `value` must be writable; `error` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fs_mittag_leffler(
    q: f64,
    beta: f64,
    x: f64,
    value: *mut f64,
    error: *mut f64,
) -> FsStatus {
    guard(|| {
        if value.is_null() {
            return Err(Failure::Null("value"));
        }
        let params = MlParams::new(q, beta).map_err(|e| Failure::Invalid(e.to_string()))?;
        let v = mittag_leffler(params, x)?;
        value.write(v.value);
        if !error.is_null() {
            error.write(v.error);
        }
        Ok(())
    })
}

/// Name of a status code as a static string.
#[no_mangle]
pub extern "C" fn fs_status_name(status: FsStatus) -> *const c_char {
    let name: &'static CStr = match status {
        FS_OK => c"ok",
        FS_NULL_POINTER => c"null_pointer",
        FS_INVALID_ARGUMENT => c"invalid_argument",
        FS_SOLVER_FAILURE => c"solver_failure",
        FS_OUT_OF_RANGE => c"out_of_range",
        FS_BUFFER_TOO_SMALL => c"buffer_too_small",
        FS_PANIC => c"panic",
        _ => c"unknown",
    };
    name.as_ptr()
}
