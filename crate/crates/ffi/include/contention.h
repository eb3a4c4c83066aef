#ifndef CONTENTION_H
#define CONTENTION_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CTN_STATUS_OK = 0,
  CTN_STATUS_NULL_POINTER = 1,
  CTN_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The index or pair is outside what the codebook enumerated.
   */
  CTN_STATUS_NOT_FOUND = 3,
  CTN_STATUS_INCOMPATIBLE = 4,
  CTN_STATUS_BUFFER_TOO_SMALL = 5,
  CTN_STATUS_IO = 6,
  CTN_STATUS_PANIC = 7,
} CtnStatus;

/**
 * Opaque codebook handle.
 */
typedef struct CtnCodebook CtnCodebook;

typedef struct {
  double threshold;
  double probability;
  /**
   * Minislots to reach this entry, including the final success.
   */
  size_t depth;
} CtnEntry;

typedef struct {
  uint64_t slots;
  uint64_t resolved;
  double mean_delay_conditional;
  double mean_delay_charged;
  double delay_std_error;
  double success_rate;
  double empirical_entropy_bits;
} CtnBatchStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ctn_version(void);

/**
 * Description of the last failure on this thread, empty after a success.
 * The pointer stays valid until the next library call on this thread.
 */
const char *ctn_last_error_message(void);

/**
 * Build the MPA codebook for `n_users` with enumeration cutoff `epsilon`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
CtnStatus ctn_codebook_build(uint32_t n_users, double epsilon, CtnCodebook **out);

/**
 * Release a codebook. Null is ignored.
 *
 * # Safety
 * `cb` is null or a handle from [`ctn_codebook_build`] not yet freed.
 */
void ctn_codebook_free(CtnCodebook *cb);

/**
 * # Safety
 * `cb` is a live handle; `out` is valid for writes.
 */
CtnStatus ctn_codebook_len(const CtnCodebook *cb, size_t *out);

/**
 * Entry `index` in order of decreasing probability.
 *
 * # Safety
 * `cb` is a live handle; `out` is valid for writes.
 */
CtnStatus ctn_codebook_entry(const CtnCodebook *cb, size_t index, CtnEntry *out);

/**
 * Copy entry `index`'s codeword (`0`, `e`, terminal `1`) into `buf` with a
 * trailing NUL. `needed`, if not null, receives the size including the NUL;
 * a short buffer yields `CTN_STATUS_BUFFER_TOO_SMALL` and is left untouched.
 *
 * # Safety
 * `cb` is a live handle; `buf` is valid for `len` bytes or null with `len`
 * zero; `needed` is null or valid for writes.
 */
CtnStatus ctn_codebook_codeword(const CtnCodebook *cb,
                                size_t index,
                                char *buf,
                                size_t len,
                                size_t *needed);

/**
 * Entropy estimate in bits, including the analytically closed tail.
 *
 * # Safety
 * `cb` is a live handle; `out` is valid for writes.
 */
CtnStatus ctn_codebook_entropy(const CtnCodebook *cb, double *out);

/**
 * Expected delay estimate in minislots.
 *
 * # Safety
 * `cb` is a live handle; `out` is valid for writes.
 */
CtnStatus ctn_codebook_expected_delay(const CtnCodebook *cb, double *out);

/**
 * Probability mass left unenumerated.
 *
 * # Safety
 * `cb` is a live handle; `out` is valid for writes.
 */
CtnStatus ctn_codebook_residual_mass(const CtnCodebook *cb, double *out);

/**
 * Index of the entry resolving the top two gains `(y_second, y_max)`.
 *
 * # Safety
 * `cb` is a live handle; `out` is valid for writes.
 */
CtnStatus ctn_codebook_resolve(const CtnCodebook *cb, double y_second, double y_max, size_t *out);

/**
 * # Safety
 * `out` is valid for writes.
 */
CtnStatus ctn_optimal_threshold(double a, double b, uint32_t n_users, double *out);

/**
 * # Safety
 * `out` is valid for writes.
 */
CtnStatus ctn_success_prob(double a, double b, uint32_t n_users, double y, double *out);

/**
 * # Safety
 * `out` is valid for writes.
 */
CtnStatus ctn_region_mass(double a, double b, uint32_t n_users, double *out);

/**
 * Simulate `slots` slots. `channel` is `iid`, `constant`, `correlated[:eps]`
 * or `chain:<k>[:eps]`; `strategy` is `osa`, `mpa`, `two-sided`,
 * `discrete-mpa` or `discrete-bisect`.
 *
 * # Safety
 * `channel` and `strategy` are NUL-terminated strings; `out` is valid for
 * writes.
 */
CtnStatus ctn_simulate(const char *channel,
                       size_t n_users,
                       const char *strategy,
                       uint64_t slots,
                       size_t max_minislots,
                       uint64_t seed,
                       CtnBatchStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONTENTION_H */
