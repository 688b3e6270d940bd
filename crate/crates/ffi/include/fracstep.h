#ifndef FRACSTEP_H
#define FRACSTEP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

#define FS_POTENTIAL_RING 0

#define FS_POTENTIAL_HARMONIC 1

#define FS_POTENTIAL_FINITE_WELL 2

#define FS_POTENTIAL_DOUBLE_WELL 3

#define FS_SCHEME_LIE 0

#define FS_SCHEME_STRANG 1

#define FS_SCHEME_SIXTH 2

#define FS_PARITY_NONE 0

#define FS_PARITY_EVEN 1

#define FS_PARITY_ODD 2

/**
 * Refinement stages chosen by potential (finite well: cascade).
 */
#define FS_REFINE_DEFAULT 0

#define FS_REFINE_OFF 1

/**
 * One stage at `refine_dt` for `refine_steps` steps.
 */
#define FS_REFINE_SINGLE 2

/**
 * Periodic grid.
 */
typedef struct FsGrid FsGrid;

/**
 * Potential description.
 */
typedef struct FsPotential FsPotential;

/**
 * Converged eigenstates in energy order.
 */
typedef struct FsSpectrum FsSpectrum;

typedef struct FsSolveOptions {
  double alpha;
  double dt;
  double tol;
  size_t max_iters;
  uint64_t seed;
  int32_t scheme;
  int32_t parity;
  int32_t refine;
  double refine_dt;
  size_t refine_steps;
} FsSolveOptions;

typedef int32_t FsStatus;

typedef struct FsStateInfo {
  double energy;
  double energy_decay;
  double residual;
  size_t iterations;
  int32_t parity;
  double boundary_ratio;
} FsStateInfo;

#define FS_OK 0

#define FS_NULL_POINTER 1

/**
 * Bad grid, order, options or potential data.
 */
#define FS_INVALID_ARGUMENT 2

/**
 * The solver or series evaluation failed to meet its accuracy checks.
 */
#define FS_SOLVER_FAILURE 3

#define FS_OUT_OF_RANGE 4

#define FS_BUFFER_TOO_SMALL 5

#define FS_PANIC 6

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `fs_*` call on the same thread.
 */
const char *fs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fs_version(void);

/**
 * Defaults for order `alpha`: `dt = 1e-2`, `tol = 1e-12`, sixth-order
 * scheme, no parity constraint, potential-dependent refinement.
 */
struct FsSolveOptions fs_solve_options_default(double alpha);

/**
 * # Safety
 * `out` must be valid for writing one pointer.
 */
FsStatus fs_grid_new(size_t n_points, double x_min, double x_max, struct FsGrid **out);

/**
 * # Safety
 * `grid` must be null or a handle from [`fs_grid_new`] not yet freed.
 */
void fs_grid_free(struct FsGrid *grid);

/**
 * # Safety
 * `grid` must be a live handle; `out` must be writable.
 */
FsStatus fs_grid_len(const struct FsGrid *grid, size_t *out);

/**
 * Copy the sample positions into `xs[0..len]`.
 *
 * # Safety
 * `grid` must be a live handle; `xs` must be writable for `len` doubles.
 */
FsStatus fs_grid_points(const struct FsGrid *grid, double *xs, size_t len);

/**
 * One of the built-in potentials with its standard parameters.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
FsStatus fs_potential_builtin(int32_t kind, struct FsPotential **out);

/**
 * Finite well of depth `v0` on `|x| < half_width`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
FsStatus fs_potential_finite_well(double v0, double half_width, struct FsPotential **out);

/**
 * Samples `values[j] = V(xs[j])`; solving requires a grid whose points
 * match `xs`.
 *
 * # Safety
 * `xs` and `values` must be readable for `len` doubles; `out` writable.
 */
FsStatus fs_potential_tabulated(const double *xs,
                                const double *values,
                                size_t len,
                                struct FsPotential **out);

/**
 * # Safety
 * `potential` must be null or a live potential handle.
 */
void fs_potential_free(struct FsPotential *potential);

/**
 * Solve for the `n_states` lowest eigenstates. On success `*out` owns the
 * result and must be released with [`fs_spectrum_free`].
 *
 * # Safety
 * `potential`, `grid` and `options` must be live; `out` writable.
 */
FsStatus fs_solve_spectrum(const struct FsPotential *potential,
                           const struct FsGrid *grid,
                           const struct FsSolveOptions *options,
                           size_t n_states,
                           struct FsSpectrum **out);

/**
 * # Safety
 * `spectrum` must be null or a handle from [`fs_solve_spectrum`].
 */
void fs_spectrum_free(struct FsSpectrum *spectrum);

/**
 * # Safety
 * `spectrum` must be live; `out` writable.
 */
FsStatus fs_spectrum_len(const struct FsSpectrum *spectrum, size_t *out);

/**
 * # Safety
 * `spectrum` must be live; `out` writable.
 */
FsStatus fs_spectrum_energy(const struct FsSpectrum *spectrum, size_t index, double *out);

/**
 * # Safety
 * `spectrum` must be live; `out` writable.
 */
FsStatus fs_spectrum_info(const struct FsSpectrum *spectrum, size_t index, struct FsStateInfo *out);

/**
 * Copy the (real, normalized) state `index` into `psi[0..len]`.
 *
 * # Safety
 * `spectrum` must be live; `psi` writable for `len` doubles.
 */
FsStatus fs_spectrum_state(const struct FsSpectrum *spectrum,
                           size_t index,
                           double *psi,
                           size_t len);

/**
 * Number of finite-well states below the barrier, from dense
 * diagonalization (grids of at most 1024 points).
 *
 * # Safety
 * `potential` must be a live finite-well handle, `grid` live, `out` writable.
 */
FsStatus fs_count_bound_states(const struct FsPotential *potential,
                               const struct FsGrid *grid,
                               double alpha,
                               size_t *out);

/**
 * `E_{q,β}(x)` and its estimated absolute error. `error` may be null.
 *
 * # Safety
 * `value` must be writable; `error` null or writable.
 */
FsStatus fs_mittag_leffler(double q, double beta, double x, double *value, double *error);

/**
 * Name of a status code as a static string.
 */
const char *fs_status_name(FsStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACSTEP_H */
