#ifndef RKHSNET_H
#define RKHSNET_H

/* Generated by cbindgen from the Rust sources; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this ABI.
 */
typedef enum RkStatus {
  /**
   * The call succeeded.
   */
  RK_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RK_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  RK_STATUS_UTF8_ERROR = 2,
  /**
   * An argument value was rejected (bad dimension, unknown point,
   * out-of-domain coordinate, bad buffer length, ...).
   */
  RK_STATUS_INVALID_ARGUMENT = 3,
  /**
   * Text input could not be parsed.
   */
  RK_STATUS_PARSE_ERROR = 4,
  /**
   * The graph is not connected.
   */
  RK_STATUS_DISCONNECTED = 5,
  /**
   * A numeric precondition failed (singular or indefinite matrix,
   * coincident points of a singular kernel, ...).
   */
  RK_STATUS_NUMERIC_ERROR = 6,
  /**
   * An I/O operation failed.
   */
  RK_STATUS_IO_ERROR = 7,
  /**
   * An internal invariant was violated; please report.
   */
  RK_STATUS_INTERNAL_ERROR = 8,
} RkStatus;

/**
 * Opaque weighted-graph handle.
 */
typedef struct RkGraph RkGraph;

/**
 * Opaque finite-kernel handle (points plus Gram matrix).
 */
typedef struct RkKernel RkKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *rkhsnet_version(void);

/**
 * Message of the most recent failure on this thread, or null if none.
 * Valid until the next failing call on the same thread.
 */
const char *rkhsnet_last_error_message(void);

/**
 * Parse an edge-list graph ("u v conductance" per line, '#' comments).
 *
 * # Safety
 *
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 * On `Ok` the caller owns the handle and must release it with
 * [`rkhsnet_graph_free`].
 */
enum RkStatus rkhsnet_graph_parse(const char *text, struct RkGraph **out);

/**
 * Release a graph handle; null is a no-op.
 *
 * # Safety
 *
 * `g` must be null or a handle from [`rkhsnet_graph_parse`] not yet
 * freed.
 */
void rkhsnet_graph_free(struct RkGraph *g);

/**
 * Number of vertices.
 *
 * # Safety
 *
 * `g` must be a live graph handle; `out` must be valid.
 */
enum RkStatus rkhsnet_graph_vertex_count(const struct RkGraph *g, size_t *out);

/**
 * Name of the vertex at `index`, or null if out of range. The pointer
 * borrows from the handle.
 *
 * # Safety
 *
 * `g` must be a live graph handle.
 */
const char *rkhsnet_graph_vertex_name(const struct RkGraph *g, size_t index);

/**
 * Resistance metric of the graph into a caller buffer of exactly
 * `vertex_count * vertex_count` doubles, row-major in vertex order.
 *
 * # Safety
 *
 * `g` must be a live graph handle, `base` a NUL-terminated string, and
 * `out` a buffer of at least `len` doubles.
 */
enum RkStatus rkhsnet_graph_resistance(const struct RkGraph *g,
                                       const char *base,
                                       double *out,
                                       size_t len);

/**
 * Kernel of the graph grounded at `base`: one point per non-base vertex.
 *
 * # Safety
 *
 * `g` must be a live graph handle, `base` a NUL-terminated string, and
 * `out` a valid pointer; on `Ok` the caller owns the kernel handle.
 */
enum RkStatus rkhsnet_network_kernel(const struct RkGraph *g,
                                     const char *base,
                                     struct RkKernel **out);

/**
 * Restrict a built-in continuous kernel
 * (bm|bridge|disk2|disk3|newton:NU) to `n_points` points of `dim`
 * coordinates each, laid out row-major.
 *
 * # Safety
 *
 * `name` must be NUL-terminated, `points` must hold
 * `n_points * dim` doubles, and `out` must be valid; on `Ok` the caller
 * owns the kernel handle.
 */
enum RkStatus rkhsnet_kernel_restrict(const char *name,
                                      const double *points,
                                      size_t n_points,
                                      size_t dim,
                                      struct RkKernel **out);

/**
 * Kernel of the geometric-conductance half-line truncated to `n`
 * vertices; conductance between vertices i-1 and i is `ratio^-(i-1)`.
 *
 * # Safety
 *
 * `out` must be a valid pointer; on `Ok` the caller owns the handle.
 */
enum RkStatus rkhsnet_ladder_kernel(double ratio, size_t n, struct RkKernel **out);

/**
 * Release a kernel handle; null is a no-op.
 *
 * # Safety
 *
 * `k` must be null or an unfreed handle from this library.
 */
void rkhsnet_kernel_free(struct RkKernel *k);

/**
 * Number of kernel points.
 *
 * # Safety
 *
 * `k` must be a live kernel handle; `out` must be valid.
 */
enum RkStatus rkhsnet_kernel_size(const struct RkKernel *k, size_t *out);

/**
 * Label of the point at `index`, or null if out of range. The pointer
 * borrows from the handle.
 *
 * # Safety
 *
 * `k` must be a live kernel handle.
 */
const char *rkhsnet_kernel_point_name(const struct RkKernel *k, size_t index);

/**
 * Copy the Gram matrix into a caller buffer of exactly `size * size`
 * doubles, row-major in point order.
 *
 * # Safety
 *
 * `k` must be a live kernel handle and `out` a buffer of at least `len`
 * doubles.
 */
enum RkStatus rkhsnet_kernel_gram(const struct RkKernel *k, double *out, size_t len);

/**
 * Membership value of the Dirac mass at the named point: the diagonal
 * entry of the inverse Gram.
 *
 * # Safety
 *
 * `k` must be a live kernel handle, `point` NUL-terminated, `out` valid.
 */
enum RkStatus rkhsnet_kernel_membership(const struct RkKernel *k, const char *point, double *out);

/**
 * Smallest eigenvalue of the Gram matrix.
 *
 * # Safety
 *
 * `k` must be a live kernel handle; `out` must be valid.
 */
enum RkStatus rkhsnet_kernel_min_eigenvalue(const struct RkKernel *k, double *out);

/**
 * Largest diagonal decrease at the named point that keeps the Gram
 * positive semidefinite.
 *
 * # Safety
 *
 * `k` must be a live kernel handle, `point` NUL-terminated, `out` valid.
 */
enum RkStatus rkhsnet_kernel_max_diagonal_perturbation(const struct RkKernel *k,
                                                       const char *point,
                                                       double *out);

/**
 * Sample Brownian-bridge paths: `n_paths * grid_len` doubles, one path
 * per row. Deterministic in (grid, n_paths, seed).
 *
 * # Safety
 *
 * `grid` must hold `grid_len` doubles and `out` at least `len` doubles.
 */
enum RkStatus rkhsnet_bridge_sample(const double *grid,
                                    size_t grid_len,
                                    size_t n_paths,
                                    uint64_t seed,
                                    double *out,
                                    size_t len);

/**
 * Heat kernel `exp(-t L)` of a symmetric PSD `n x n` matrix into a
 * caller buffer of `n * n` doubles.
 *
 * # Safety
 *
 * `matrix` must hold `n * n` doubles and `out` at least `len` doubles.
 */
enum RkStatus rkhsnet_heat_kernel(const double *matrix,
                                  size_t n,
                                  double t,
                                  double *out,
                                  size_t len);

/**
 * Green matrix (inverse) of a symmetric positive definite `n x n`
 * matrix into a caller buffer of `n * n` doubles.
 *
 * # Safety
 *
 * `matrix` must hold `n * n` doubles and `out` at least `len` doubles.
 */
enum RkStatus rkhsnet_green_matrix(const double *matrix, size_t n, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RKHSNET_H */
