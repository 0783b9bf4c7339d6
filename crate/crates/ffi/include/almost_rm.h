#ifndef ALMOST_RM_H
#define ALMOST_RM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes. `0` is success; the rest mirror the library's error kinds.
 */
typedef enum AlmostRmStatus {
  ALMOST_RM_STATUS_OK = 0,
  ALMOST_RM_STATUS_SIZE = 1,
  ALMOST_RM_STATUS_DIMENSION = 2,
  ALMOST_RM_STATUS_DOMAIN = 3,
  ALMOST_RM_STATUS_PRECONDITION = 4,
  ALMOST_RM_STATUS_INFEASIBLE = 5,
  ALMOST_RM_STATUS_PARSE = 6,
  ALMOST_RM_STATUS_MISSING = 7,
  ALMOST_RM_STATUS_IO = 8,
  ALMOST_RM_STATUS_NULL_ARGUMENT = 9,
  /**
   * A Rust panic was caught at the boundary.
   */
  ALMOST_RM_STATUS_INTERNAL = 10,
  /**
   * The caller's buffer was too small; the required size was written.
   */
  ALMOST_RM_STATUS_BUFFER_TOO_SMALL = 11,
} AlmostRmStatus;

/**
 * Ranking used by [`almost_rm_code_build`].
 */
typedef enum AlmostRmOracle {
  /**
   * Exact Bhattacharyya parameters on BSC(p); m <= 4.
   */
  ALMOST_RM_ORACLE_EXACT = 0,
  /**
   * Decoding-order rank; any m.
   */
  ALMOST_RM_ORACLE_PROXY = 1,
} AlmostRmOracle;

/**
 * Opaque handle to a built code.
 */
typedef struct AlmostRmCode AlmostRmCode;

/**
 * Monte Carlo block-error estimate with its Wilson 95% interval.
 */
typedef struct AlmostRmSimResult {
  uint64_t trials;
  uint64_t failures;
  double estimate;
  double ci_low;
  double ci_high;
} AlmostRmSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread (empty after success).
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *almost_rm_last_error(void);

/**
 * Compares two sets in the decoding order: `-1` if `a` comes first, `0` if
 * equal, `1` if `a` comes later.
 *
 * # Safety
 * Pointer arguments must be NULL or valid for the accesses described.
 */
enum AlmostRmStatus almost_rm_order_compare(uint32_t m, uint64_t a, uint64_t b, int32_t *out);

/**
 * Whether `b` can be constructed from `a` (`a ≪ b`).
 *
 * # Safety
 * Pointer arguments must be NULL or valid for the accesses described.
 */
enum AlmostRmStatus almost_rm_constructible(uint32_t m, uint64_t a, uint64_t b, bool *out);

/**
 * Exact Bhattacharyya parameter `Z_A` on BSC(p). `m <= 4`, or `m = 5` with
 * `allow_high_cost` (about 2^32 steps).
 *
 * # Safety
 * Pointer arguments must be NULL or valid for the accesses described.
 */
enum AlmostRmStatus almost_rm_bhattacharyya(uint32_t m,
                                            uint64_t a,
                                            double p,
                                            bool allow_high_cost,
                                            double *out);

/**
 * Builds `RM(m, r, δ)`. `p` is only read for [`AlmostRmOracle::Exact`].
 * On success `*out` owns a handle to release with [`almost_rm_code_free`].
 *
 * # Safety
 * Pointer arguments must be NULL or valid for the accesses described.
 */
enum AlmostRmStatus almost_rm_code_build(uint32_t m,
                                         uint32_t r,
                                         double delta,
                                         enum AlmostRmOracle oracle,
                                         double p,
                                         struct AlmostRmCode **out);

/**
 * Parses a code from its text format.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string.
 */
enum AlmostRmStatus almost_rm_code_from_text(const char *text, struct AlmostRmCode **out);

/**
 * Writes the text format into `buf` (NUL-terminated) when `cap` is large
 * enough. `*needed` always receives the required size including the NUL.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes (or NULL when `cap` is 0).
 */
enum AlmostRmStatus almost_rm_code_to_text(const struct AlmostRmCode *code,
                                           char *buf,
                                           size_t cap,
                                           size_t *needed);

/**
 * Releases a code handle.
 *
 * # Safety
 * `code` must come from this library and not be used afterwards.
 */
void almost_rm_code_free(struct AlmostRmCode *code);

/**
 * Number of information sets `|𝒜|`.
 *
 * # Safety
 * Pointer arguments must be NULL or valid for the accesses described.
 */
enum AlmostRmStatus almost_rm_code_len(const struct AlmostRmCode *code, size_t *out);

/**
 * The `index`-th information set in decoding order, as a mask.
 *
 * # Safety
 * Pointer arguments must be NULL or valid for the accesses described.
 */
enum AlmostRmStatus almost_rm_code_set_at(const struct AlmostRmCode *code,
                                          size_t index,
                                          uint64_t *out);

/**
 * Rate `|𝒜| / 2^m`.
 *
 * # Safety
 * Pointer arguments must be NULL or valid for the accesses described.
 */
enum AlmostRmStatus almost_rm_code_rate(const struct AlmostRmCode *code, double *out);

/**
 * Seeded Monte Carlo block error under successive decoding (m <= 4).
 *
 * # Safety
 * Pointer arguments must be NULL or valid for the accesses described.
 */
enum AlmostRmStatus almost_rm_simulate(const struct AlmostRmCode *code,
                                       double p,
                                       uint64_t trials,
                                       uint64_t seed,
                                       struct AlmostRmSimResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALMOST_RM_H */
