#ifndef NEVANLINNA_H
#define NEVANLINNA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Zero is success.
typedef enum NvStatus {
  NV_OK = 0,
  NV_NULL_POINTER = 1,
  NV_INVALID_INPUT = 2,
  NV_INFEASIBLE = 3,
  NV_DECOMPOSITION_INVALID = 4,
  NV_NUMERICAL = 5,
  NV_PANIC = 6,
} NvStatus;

typedef struct NvAux NvAux;

typedef struct NvDecomposition NvDecomposition;

typedef struct NvProblem NvProblem;

// Summary of a feasibility solve.
typedef struct NvSolveInfo {
  // 1 when a decomposition was found.
  int32_t feasible;
  double affine_residual;
  double min_eigenvalue;
  size_t iterations;
} NvSolveInfo;

typedef struct NvVerification {
  double interp_residual;
  double schur_norm_max;
  size_t samples;
  // 1 when both checks pass.
  int32_t pass;
} NvVerification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after success.
// The pointer stays valid until the next call on the same thread.
const char *nv_last_error(void);

// Library version as a static NUL-terminated string.
const char *nv_version(void);

// Parses a problem document (the CLI's JSON problem format).
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum NvStatus nv_problem_from_json(const char *json, struct NvProblem **out);

// # Safety
// `problem` must come from [`nv_problem_from_json`] and not be used afterwards.
void nv_problem_free(struct NvProblem *problem);

// Number of points, output and input dimensions of the targets, and the
// dimension of the domain.
//
// # Safety
// `problem` must be a live handle; any of the outputs may be null.
enum NvStatus nv_problem_shape(const struct NvProblem *problem,
                               size_t *points,
                               size_t *d_out,
                               size_t *d_in,
                               size_t *dimension);

// Searches for an Agler decomposition. Returns `NvOk` and a handle in
// `out` when feasible, `NvInfeasible` with `*out` null otherwise. `info`
// may be null. Non-positive `tol` or zero `max_iter` select the defaults.
//
// # Safety
// `problem` must be a live handle and `out` a valid pointer.
enum NvStatus nv_solve(const struct NvProblem *problem,
                       double tol,
                       size_t max_iter,
                       struct NvDecomposition **out,
                       struct NvSolveInfo *info);

// # Safety
// `decomposition` must come from [`nv_solve`] and not be used afterwards.
void nv_decomposition_free(struct NvDecomposition *decomposition);

// Builds the auxiliary function. Non-positive `tol` selects the default.
//
// # Safety
// Handles must be live and `out` a valid pointer.
enum NvStatus nv_build_aux(const struct NvProblem *problem,
                           const struct NvDecomposition *decomposition,
                           double tol,
                           struct NvAux **out);

// # Safety
// `aux` must come from this library and not be used afterwards.
void nv_aux_free(struct NvAux *aux);

// Dimensions of the parameter spaces `M1`, `M2` and of the state space.
//
// # Safety
// `aux` must be a live handle; outputs may be null.
enum NvStatus nv_aux_dims(const struct NvAux *aux,
                          size_t *dim_m1,
                          size_t *dim_m2,
                          size_t *state_dim);

// Serializes the auxiliary function; free the string with [`nv_string_free`].
//
// # Safety
// `aux` must be a live handle and `out` a valid pointer.
enum NvStatus nv_aux_to_json(const struct NvAux *aux, char **out);

// Loads an auxiliary function serialized by [`nv_aux_to_json`] or the CLI.
//
// # Safety
// `json` must be NUL-terminated and `out` a valid pointer.
enum NvStatus nv_aux_from_json(const char *json, struct NvAux **out);

// # Safety
// `s` must come from this library and not be used afterwards.
void nv_string_free(char *s);

// Evaluates the interpolant for the constant parameter `t` at the point `z`.
//
// `z` holds `dimension` complex coordinates, `t` a `dim_m2 x dim_m1` matrix
// (null means the zero parameter), and `out` receives the `d_out x d_in`
// value.
//
// # Safety
// Handles must be live and buffers large enough for the stated shapes.
enum NvStatus nv_interpolant_eval(const struct NvProblem *problem,
                                  const struct NvAux *aux,
                                  const double *t,
                                  const double *z,
                                  size_t dimension,
                                  double *out);

// Checks the interpolant for the constant parameter `t` (null for zero).
//
// # Safety
// Handles must be live, `t` sized `dim_m2 x dim_m1` if non-null, and `out`
// a valid pointer.
enum NvStatus nv_verify(const struct NvProblem *problem,
                        const struct NvAux *aux,
                        const double *t,
                        size_t samples,
                        uint64_t seed,
                        struct NvVerification *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEVANLINNA_H */
