#ifndef PME_ABSORB_H
#define PME_ABSORB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every call.
typedef enum PmeStatus {
  PME_STATUS_OK = 0,
  PME_STATUS_NULL_POINTER = 1,
  PME_STATUS_INVALID_ARGUMENT = 2,
  PME_STATUS_OUT_OF_RANGE = 3,
  PME_STATUS_NUMERICAL = 4,
  PME_STATUS_CONFIG = 5,
  PME_STATUS_IO = 6,
  // A check ran but did not pass (see `pme_run_config`).
  PME_STATUS_CHECK_FAILED = 7,
  PME_STATUS_PANIC = 8,
} PmeStatus;

typedef enum PmeScheme {
  PME_SCHEME_BACKWARD_EULER = 0,
  PME_SCHEME_BDF2 = 1,
} PmeScheme;

// Opaque shooting result.
typedef struct PmeShot PmeShot;

// Opaque radial simulation.
typedef struct PmeSimulation PmeSimulation;

typedef struct PmeParams {
  double m;
  double q;
  double sigma;
  uint32_t dim;
} PmeParams;

typedef struct PmeExponents {
  double alpha;
  double beta;
  double k1;
  double k3;
  double a_stat;
  double interface_exponent;
} PmeExponents;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to
// `len`). Returns the full message length without the terminator.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t pme_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *pme_version(void);

// `Ok` if the parameters are admissible, `OutOfRange` otherwise.
enum PmeStatus pme_params_validate(struct PmeParams p);

// # Safety
// `out` must be null or point to writable memory for one `PmeExponents`.
enum PmeStatus pme_exponents(struct PmeParams p, struct PmeExponents *out_exponents);

// Shoots for `a*`. `precise != 0` selects the tight tolerances.
//
// # Safety
// `out_shot` must be null or valid for writing one pointer.
enum PmeStatus pme_shoot(struct PmeParams p, int32_t precise, struct PmeShot **out_shot);

// # Safety
// `shot` must come from `pme_shoot` and not be used afterwards. Null is ignored.
void pme_shot_free(struct PmeShot *shot);

// `a*`, `ξ0*` and the relative bracket width.
//
// # Safety
// `shot` must be a live handle; each output must be null (skipped) or writable.
enum PmeStatus pme_shot_summary(const struct PmeShot *shot,
                                double *a_star,
                                double *xi0_star,
                                double *width);

// Number of profile samples.
//
// # Safety
// `shot` must be a live handle and `len` writable.
enum PmeStatus pme_shot_len(const struct PmeShot *shot, size_t *len);

// Copies up to `cap` samples `(ξ, f)`; `written` receives the count.
//
// # Safety
// `xi` and `f` must be valid for `cap` doubles; `written` may be null.
enum PmeStatus pme_shot_samples(const struct PmeShot *shot,
                                double *xi,
                                double *f,
                                size_t cap,
                                size_t *written);

// Self-similar solution `t^{-α} f*(r t^β)` (linear interpolation, zero past the edge).
//
// # Safety
// `shot` must be a live handle and `value` writable.
enum PmeStatus pme_shot_self_similar(const struct PmeShot *shot, double t, double r, double *value);

// New simulation on `[0, r_max]` with `n_cells` cells, starting at `t0` from the
// `n_cells + 1` nodal values `u0` (the last one is replaced by the boundary value 0).
//
// # Safety
// `u0` must be valid for `len` doubles and `out_sim` writable.
enum PmeStatus pme_sim_new(struct PmeParams p,
                           double r_max,
                           size_t n_cells,
                           double t0,
                           const double *u0,
                           size_t len,
                           struct PmeSimulation **out_sim);

// # Safety
// `sim` must come from `pme_sim_new` and not be used afterwards. Null is ignored.
void pme_sim_free(struct PmeSimulation *sim);

// # Safety
// `sim` must be a live handle.
enum PmeStatus pme_sim_set_scheme(struct PmeSimulation *sim, enum PmeScheme scheme);

// Advances to `t_end` with fixed steps `dt` (the last one shortened).
//
// # Safety
// `sim` must be a live handle.
enum PmeStatus pme_sim_advance(struct PmeSimulation *sim, double t_end, double dt);

// Current time, `sup u` and support radius (`u > eps_supp`).
//
// # Safety
// `sim` must be a live handle; each output must be null (skipped) or writable.
enum PmeStatus pme_sim_observe(const struct PmeSimulation *sim,
                               double eps_supp,
                               double *t,
                               double *sup_u,
                               double *support);

// Copies the nodal values; `cap` must be at least `n_cells + 1`.
//
// # Safety
// `u` must be valid for `cap` doubles.
enum PmeStatus pme_sim_copy_u(const struct PmeSimulation *sim, double *u, size_t cap);

// Runs a task from a TOML file as the command line does. `task` is one of `shoot`,
// `verify-profile`, `simulate`, `sweep`, `acceptance`; `out_dir` may be null to use the
// file's `output_dir`. Returns `CheckFailed` when a verification did not pass.
//
// # Safety
// `config_path` and `task` must be NUL-terminated strings; `out_dir` null or one.
enum PmeStatus pme_run_config(const char *config_path, const char *task, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PME_ABSORB_H */
