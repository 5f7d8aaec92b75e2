#ifndef RATIOLIM_H
#define RATIOLIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call across the C ABI.
 */
typedef enum RlStatus {
  RL_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RL_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  RL_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed kernel, route, number or precision.
   */
  RL_STATUS_INVALID_INPUT = 3,
  /**
   * The request is well formed but mathematically inapplicable.
   */
  RL_STATUS_INAPPLICABLE = 4,
  /**
   * An iteration or root solve failed to converge.
   */
  RL_STATUS_NUMERIC = 5,
  /**
   * An index or size argument is out of range.
   */
  RL_STATUS_OUT_OF_RANGE = 6,
  /**
   * An internal panic was caught.
   */
  RL_STATUS_PANIC = 7,
} RlStatus;

/**
 * Opaque table of ratio coefficients `phi_1..phi_N`.
 */
typedef struct RlRatioTable RlRatioTable;

/**
 * Opaque set of indicial roots.
 */
typedef struct RlRootSet RlRootSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rl_version(void);

/**
 * Message for the most recent failure on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *rl_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string obtained from this library, not yet freed.
 */
void rl_string_free(char *s);

/**
 * Computes `phi_1..phi_n` for `kernel` at `digits` significant digits.
 *
 * `route` is one of `closed`, `product`, `recurrence`, `fixedpoint`, or
 * null for automatic selection.
 *
 * # Safety
 * `kernel` must be a NUL-terminated string, `route` null or one, and
 * `out` a valid pointer to writable storage.
 */
enum RlStatus rl_table_compute(const char *kernel,
                               const char *route,
                               size_t n,
                               uint32_t digits,
                               struct RlRatioTable **out);

/**
 * Number of coefficients in the table, or 0 for a null handle.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t rl_table_len(const struct RlRatioTable *table);

/**
 * `phi_n` rounded to double precision; `n` is 1-based.
 *
 * # Safety
 * `table` must be a live handle and `out` valid for writes.
 */
enum RlStatus rl_table_get(const struct RlRatioTable *table, size_t n, double *out);

/**
 * `phi_n` in scientific notation with `digits` significant figures.
 *
 * # Safety
 * `table` must be a live handle and `out` valid for writes. The string
 * written to `out` must be released with [`rl_string_free`].
 */
enum RlStatus rl_table_get_string(const struct RlRatioTable *table,
                                  size_t n,
                                  uint32_t digits,
                                  char **out);

/**
 * The whole table as CSV with header `n,phi,route,digits`.
 *
 * # Safety
 * As for [`rl_table_get_string`].
 */
enum RlStatus rl_table_to_csv(const struct RlRatioTable *table, char **out);

/**
 * Largest relative defect of the table under the Schröder operator.
 *
 * # Safety
 * `table` must be a live handle and `out` valid for writes.
 */
enum RlStatus rl_table_schroder_residual(const struct RlRatioTable *table, double *out);

/**
 * Releases a table. Null is ignored.
 *
 * # Safety
 * `table` must be null or a handle from [`rl_table_compute`], not yet freed.
 */
void rl_table_free(struct RlRatioTable *table);

/**
 * Roots of `(m+1)^alpha - 1 = m alpha / (m+1)`: the real roots `-1` and
 * `0` plus the first `count` conjugate pairs with positive real part.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RlStatus rl_roots_binomial(uint32_t m, size_t count, uint32_t digits, struct RlRootSet **out);

/**
 * Roots of `(1+a)^(alpha+1) + (1+alpha) e^(-a) = 0`: the real root plus
 * the first `count` conjugate pairs. `a` is a decimal or rational string
 * such as `"2"` or `"3/2"`.
 *
 * # Safety
 * `a` must be a NUL-terminated string and `out` valid for writes.
 */
enum RlStatus rl_roots_tail(const char *a, size_t count, uint32_t digits, struct RlRootSet **out);

/**
 * Number of roots in the set, or 0 for a null handle.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
size_t rl_roots_len(const struct RlRootSet *set);

/**
 * Root `i` (0-based, sorted by real then imaginary part) in double precision.
 *
 * # Safety
 * `set` must be a live handle; `re` and `im` valid for writes.
 */
enum RlStatus rl_roots_get(const struct RlRootSet *set, size_t i, double *re, double *im);

/**
 * The root set as CSV with header `re,im,residual`.
 *
 * # Safety
 * `set` must be a live handle and `out` valid for writes. The string must
 * be released with [`rl_string_free`].
 */
enum RlStatus rl_roots_to_csv(const struct RlRootSet *set, uint32_t digits, char **out);

/**
 * Releases a root set. Null is ignored.
 *
 * # Safety
 * `set` must be null or a handle from this library, not yet freed.
 */
void rl_roots_free(struct RlRootSet *set);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* RATIOLIM_H */
