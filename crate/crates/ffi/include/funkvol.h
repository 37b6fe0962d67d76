#ifndef FUNKVOL_H
#define FUNKVOL_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FunkvolStatus {
  FUNKVOL_STATUS_OK = 0,
  FUNKVOL_STATUS_NULL_POINTER = 1,
  FUNKVOL_STATUS_INVALID_ARGUMENT = 2,
  FUNKVOL_STATUS_GEOMETRY = 3,
  FUNKVOL_STATUS_QUADRATURE = 4,
  FUNKVOL_STATUS_OPTIMIZATION = 5,
  FUNKVOL_STATUS_PANIC = 6,
} FunkvolStatus;

// Opaque polytope handle.
typedef struct FunkvolPolytope FunkvolPolytope;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds the convex hull of `num_vertices` points of dimension `dim`,
// stored row by row in `coords`.
//
// # Safety
// `coords` must point to `num_vertices * dim` doubles and `out` must be writable.
enum FunkvolStatus funkvol_polytope_new(const double *coords,
                                        size_t num_vertices,
                                        size_t dim,
                                        struct FunkvolPolytope **out);

// # Safety
// `p` must come from `funkvol_polytope_new` and not be used afterwards. Null is ignored.
void funkvol_polytope_free(struct FunkvolPolytope *p);

// Dimension, or 0 for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t funkvol_polytope_dim(const struct FunkvolPolytope *p);

// # Safety
// `p` must be null or a live handle.
size_t funkvol_polytope_num_vertices(const struct FunkvolPolytope *p);

// # Safety
// `p` must be null or a live handle.
size_t funkvol_polytope_num_flags(const struct FunkvolPolytope *p);

// Holmes–Thompson volume of the Funk ball of radius `r` about `center`
// (null means the origin). `tol <= 0` selects the default for the dimension.
// `abs_error` may be null.
//
// # Safety
// `p` must be live, `center` null or of length `dim`, `value` writable.
enum FunkvolStatus funkvol_ball_volume(const struct FunkvolPolytope *p,
                                       const double *center,
                                       double r,
                                       double tol,
                                       double *value,
                                       double *abs_error);

// Leading coefficient `c0 = |flags| / (n!)^2`.
//
// # Safety
// `p` must be live and `out` writable.
enum FunkvolStatus funkvol_c0(const struct FunkvolPolytope *p, double *out);

// Second coefficient for balls about the origin.
//
// # Safety
// `p` must be live and `out` writable.
enum FunkvolStatus funkvol_c1(const struct FunkvolPolytope *p, double *out);

// Second coefficient for balls about `x`.
//
// # Safety
// `p` must be live, `x` of length `dim`, `out` writable.
enum FunkvolStatus funkvol_c1_at_point(const struct FunkvolPolytope *p,
                                       const double *x,
                                       double *out);

// Limit Funk–Santaló point, written to `point_out` (length `dim`).
// `residual` may be null.
//
// # Safety
// `p` must be live and `point_out` must hold `dim` doubles.
enum FunkvolStatus funkvol_santalo_infinity(const struct FunkvolPolytope *p,
                                            double tol,
                                            double *point_out,
                                            double *residual);

// Closed-form ball volume shared by all `n`-dimensional Hanner polytopes;
// NaN for `n == 0` or `r <= 0`.
double funkvol_hanner_ball_volume(size_t n, double r);

// Holmes–Thompson volume of a radius-`r` ball about the barycenter of an
// `n`-simplex, from the dimension recursion.
//
// # Safety
// `out` must be writable.
enum FunkvolStatus funkvol_simplex_volume(size_t n, double r, double tol, double *out);

// Copies the last error message of this thread, NUL-terminated and
// truncated to `len` bytes, into `buf`. Returns the full message length;
// a null `buf` only queries it.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t funkvol_last_error_message(char *buf, size_t len);

// Static description of a status code.
const char *funkvol_status_string(enum FunkvolStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FUNKVOL_H */
