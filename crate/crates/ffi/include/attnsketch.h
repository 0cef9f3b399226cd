/* attnsketch C ABI: streaming attention estimators behind opaque handles. */

#ifndef ATTNSKETCH_H
#define ATTNSKETCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum AttnStatus {
  ATTN_STATUS_OK = 0,
  ATTN_STATUS_NULL_POINTER = 1,
  ATTN_STATUS_INVALID_ARGUMENT = 2,
  ATTN_STATUS_DIM_MISMATCH = 3,
  ATTN_STATUS_EMPTY_STATE = 4,
  ATTN_STATUS_INDEX_OUT_OF_RANGE = 5,
  ATTN_STATUS_INTERNAL = 6,
} AttnStatus;

/**
 * Opaque seeded Gaussian projection.
 */
typedef struct AttnProjector AttnProjector;

/**
 * Opaque d = 1 streaming attention state.
 */
typedef struct AttnScalarStream AttnScalarStream;

/**
 * Opaque sliding-window estimator state (ring buffers, reservoir, RNG).
 */
typedef struct AttnWindow AttnWindow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *attnsketch_status_message(enum AttnStatus status);

/**
 * Creates a sliding-window estimator for width `w` and embedding dimension
 * `dim`, with all randomness derived from `seed`. Returns NULL on invalid
 * parameters. Free with `attnsketch_window_free`.
 */
struct AttnWindow *attnsketch_window_new(uintptr_t w, uintptr_t dim, uint64_t seed);

/**
 * Ingests one (q, k, v) triple of `dim` doubles each.
 *
 * # Safety
 * `handle` must come from `attnsketch_window_new` and not be freed; the
 * three pointers must reference `dim` readable doubles, where `dim` is the
 * dimension the handle was created with.
 */
enum AttnStatus attnsketch_window_process(struct AttnWindow *handle,
                                          const double *q,
                                          const double *k,
                                          const double *v,
                                          uintptr_t dim);

/**
 * Draws one unbiased estimate of sliding-window attention for query `q`
 * into `out` (`dim` doubles).
 *
 * # Safety
 * `handle` as in `attnsketch_window_process`; `q` must reference `dim`
 * readable doubles and `out` `dim` writable doubles.
 */
enum AttnStatus attnsketch_window_sample(struct AttnWindow *handle,
                                         const double *q,
                                         double *out,
                                         uintptr_t dim);

/**
 * Number of embedding vectors currently retained (at most 2W + 1).
 *
 * # Safety
 * `handle` as in `attnsketch_window_process`.
 */
uintptr_t attnsketch_window_stored_vectors(const struct AttnWindow *handle);

/**
 * Stream position (number of triples processed).
 *
 * # Safety
 * `handle` as in `attnsketch_window_process`.
 */
uintptr_t attnsketch_window_step(const struct AttnWindow *handle);

/**
 * Frees a window estimator handle; NULL is a no-op.
 *
 * # Safety
 * `handle` must come from `attnsketch_window_new` and not be freed twice.
 */
void attnsketch_window_free(struct AttnWindow *handle);

/**
 * Creates a d = 1 streaming estimator seeded with `seed`.
 * Free with `attnsketch_scalar_free`.
 */
struct AttnScalarStream *attnsketch_scalar_new(uint64_t seed);

/**
 * Ingests one (key, value) scalar pair.
 *
 * # Safety
 * `handle` must come from `attnsketch_scalar_new` and not be freed.
 */
enum AttnStatus attnsketch_scalar_update(struct AttnScalarStream *handle, double key, double value);

/**
 * Draws one unbiased attention estimate for query `q` into `out`.
 *
 * # Safety
 * `handle` as in `attnsketch_scalar_update`; `out` must be writable.
 */
enum AttnStatus attnsketch_scalar_query(struct AttnScalarStream *handle, double q, double *out);

/**
 * Count of retained key/value scalars (stays within 8 sqrt(n)).
 *
 * # Safety
 * `handle` as in `attnsketch_scalar_update`.
 */
uintptr_t attnsketch_scalar_stored(const struct AttnScalarStream *handle);

/**
 * Number of pairs ingested so far.
 *
 * # Safety
 * `handle` as in `attnsketch_scalar_update`.
 */
uintptr_t attnsketch_scalar_len(const struct AttnScalarStream *handle);

/**
 * Frees a scalar-stream handle; NULL is a no-op.
 *
 * # Safety
 * `handle` must come from `attnsketch_scalar_new` and not be freed twice.
 */
void attnsketch_scalar_free(struct AttnScalarStream *handle);

/**
 * Creates a seeded projection from `source_dim` to `target_dim` dimensions.
 * Returns NULL on invalid parameters. Free with `attnsketch_projector_free`.
 */
struct AttnProjector *attnsketch_projector_new(uint64_t seed,
                                               uintptr_t source_dim,
                                               uintptr_t target_dim);

/**
 * Projects `x` (`source_dim` doubles) into `out` (`target_dim` doubles).
 *
 * # Safety
 * `handle` must come from `attnsketch_projector_new` and not be freed;
 * buffer lengths must match the handle's dimensions.
 */
enum AttnStatus attnsketch_projector_project(const struct AttnProjector *handle,
                                             const double *x,
                                             uintptr_t source_dim,
                                             double *out,
                                             uintptr_t target_dim);

/**
 * Image of the `index`-th standard basis vector (0-based) into `out`.
 *
 * # Safety
 * As in `attnsketch_projector_project`.
 */
enum AttnStatus attnsketch_projector_basis(const struct AttnProjector *handle,
                                           uintptr_t index,
                                           double *out,
                                           uintptr_t target_dim);

/**
 * Frees a projector handle; NULL is a no-op.
 *
 * # Safety
 * `handle` must come from `attnsketch_projector_new` and not be freed twice.
 */
void attnsketch_projector_free(struct AttnProjector *handle);

/**
 * Target dimension preserving pairwise inner products of `n` unit vectors
 * to within `eps`: ceil(12 ln n / (eps^2 - eps^3)).
 *
 * # Safety
 * `out` must be writable.
 */
enum AttnStatus attnsketch_dim_for(uintptr_t n, double eps, uintptr_t *out);

/**
 * Readout thresholds for the planted-bit decoders: a zero bit stays at or
 * below `lo`, a one bit at or above `hi`. For eta > 0 the margin
 * (1+eta) lo < (1-eta) hi is validated.
 *
 * # Safety
 * `lo` and `hi` must be writable.
 */
enum AttnStatus attnsketch_thresholds(uintptr_t n,
                                      double c,
                                      double eps,
                                      double eta,
                                      double *lo,
                                      double *hi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ATTNSKETCH_H */
