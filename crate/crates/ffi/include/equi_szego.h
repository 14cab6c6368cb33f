#ifndef EQUI_SZEGO_H
#define EQUI_SZEGO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum EsStatus {
  ES_STATUS_OK = 0,
  ES_STATUS_NULL_POINTER = 1,
  ES_STATUS_INVALID_ARGUMENT = 2,
  /*
   A mathematical hypothesis failed (e.g. point off the locus).
   */
  ES_STATUS_ASSUMPTION_VIOLATED = 3,
  ES_STATUS_FAILURE = 4,
  ES_STATUS_PANIC = 5,
} EsStatus;

/*
 Opaque isotype basis of `H(X)_{ν_G, kν_T}`.
 */
typedef struct EsBasis EsBasis;

/*
 Opaque weight system `(n, W_G, W_T)`.
 */
typedef struct EsWeightSystem EsWeightSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *es_version(void);

/*
 Copies the calling thread's last error message into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length excluding the NUL,
 or 0 when there is no error.

 # Safety
 `buf` must be valid for `len` bytes or null.
 */
size_t es_last_error_message(char *buf, size_t len);

/*
 Creates a weight system. `w_g` is `d_g × (n+1)` (may be null when
 `d_g = 0`), `w_t` is `d_t × (n+1)`.

 # Safety
 Pointers must be valid for the stated sizes; `out` must be writable.
 */
enum EsStatus es_weight_system_new(size_t n,
                                   const int64_t *w_g,
                                   size_t d_g,
                                   const int64_t *w_t,
                                   size_t d_t,
                                   struct EsWeightSystem **out);

/*
 The worked example on ℙ¹ (`which = 1`) or ℙ² (`which = 2`).

 # Safety
 `out` must be writable.
 */
enum EsStatus es_weight_system_example(uint32_t which, struct EsWeightSystem **out);

/*
 # Safety
 `ws` must come from `es_weight_system_new`/`_example` or be null.
 */
void es_weight_system_free(struct EsWeightSystem *ws);

/*
 `n` of the weight system.

 # Safety
 `ws` must be a live handle.
 */
enum EsStatus es_weight_system_n(const struct EsWeightSystem *ws, size_t *out);

/*
 Builds the orthonormal monomial basis of the `(ν_G, kν_T)` isotype.

 # Safety
 `nu_g`/`nu_t` must hold `d_g`/`d_t` entries of the weight system.
 */
enum EsStatus es_basis_new(const struct EsWeightSystem *ws,
                           const int64_t *nu_g,
                           size_t d_g,
                           const int64_t *nu_t,
                           size_t d_t,
                           uint64_t k,
                           struct EsBasis **out);

/*
 # Safety
 `b` must come from `es_basis_new` or be null.
 */
void es_basis_free(struct EsBasis *b);

/*
 # Safety
 `b` must be a live handle.
 */
enum EsStatus es_basis_dim(const struct EsBasis *b, size_t *out);

/*
 `Π̃(x, x)`.

 # Safety
 `x` must hold `2(n+1)` doubles.
 */
enum EsStatus es_szego_diag(const struct EsBasis *b, const double *x, double *out);

/*
 `Π̃(x, y)` as `(re, im)`.

 # Safety
 `x`, `y` must hold `2(n+1)` doubles each.
 */
enum EsStatus es_szego_eval(const struct EsBasis *b,
                            const double *x,
                            const double *y,
                            double *out_re,
                            double *out_im);

/*
 Predicted leading term of `Π̃(x, x)` at a locus point, including the
 stabilizer factor.

 # Safety
 Sizes as in `es_basis_new`; `x` must hold `2(n+1)` doubles.
 */
enum EsStatus es_diagonal_leading(const struct EsWeightSystem *ws,
                                  const double *x,
                                  const int64_t *nu_g,
                                  size_t d_g,
                                  const int64_t *nu_t,
                                  size_t d_t,
                                  uint64_t k,
                                  double *out);

/*
 Order of the stabilizer of `x` in `G × T`.

 # Safety
 `x` must hold `2(n+1)` doubles.
 */
enum EsStatus es_stabilizer_order(const struct EsWeightSystem *ws, const double *x, size_t *out);

/*
 Distance from `x` to the locus `X_{0,ν_T}`.

 # Safety
 `x` must hold `2(n+1)` doubles; `nu_t` `d_t` entries.
 */
enum EsStatus es_locus_distance(const struct EsWeightSystem *ws,
                                const double *x,
                                const int64_t *nu_t,
                                size_t d_t,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EQUI_SZEGO_H */
