#ifndef EDGECACHE_H
#define EDGECACHE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Values accepted by the `scheme` parameters.
 */
enum EdgecacheScheme
#ifdef __cplusplus
  : uint32_t
#endif // __cplusplus
 {
  EDGECACHE_SCHEME_MDS = 0,
  EDGECACHE_SCHEME_ECC = 1,
};
#ifndef __cplusplus
typedef uint32_t EdgecacheScheme;
#endif // __cplusplus

typedef enum EdgecacheStatus {
  EDGECACHE_STATUS_OK = 0,
  EDGECACHE_STATUS_NULL_POINTER = 1,
  EDGECACHE_STATUS_INVALID_ARGUMENT = 2,
  EDGECACHE_STATUS_ANALYTIC_UNAVAILABLE = 3,
  EDGECACHE_STATUS_BUDGET_EXCEEDED = 4,
  EDGECACHE_STATUS_PANIC = 5,
} EdgecacheStatus;

/**
 * Opaque scenario handle.
 */
typedef struct EdgecacheScenario EdgecacheScenario;

typedef struct EdgecacheLoadReport {
  double mean_load;
  double normalized_mean;
  /**
   * NaN when `has_std_error` is 0 (a single trial).
   */
  double std_error;
  uint8_t has_std_error;
  uint64_t trials;
  uint64_t seed;
} EdgecacheLoadReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the
 * library and valid until the next failing call on this thread.
 */
const char *edgecache_last_error(void);

/**
 * Creates a scenario. `zipf_alpha <= 0` selects uniform requests.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum EdgecacheStatus edgecache_scenario_new(uint32_t n_files,
                                            uint32_t n_fragments,
                                            uint32_t cache_size,
                                            uint32_t u_b,
                                            uint32_t u_w,
                                            uint32_t u_2,
                                            double zipf_alpha,
                                            struct EdgecacheScenario **out);

/**
 * Releases a scenario; null is ignored.
 *
 * # Safety
 * `handle` must be null or a handle not yet freed.
 */
void edgecache_scenario_free(struct EdgecacheScenario *handle);

/**
 * Closed-form expected backhaul packets, rounded to `double`.
 *
 * # Safety
 * `handle` must be null or live; `out` null or valid for writes.
 */
enum EdgecacheStatus edgecache_analytic_load(const struct EdgecacheScenario *handle,
                                             uint32_t scheme,
                                             double *out);

/**
 * Closed-form expected backhaul packets as an exact rational `"n/d"`.
 *
 * # Safety
 * `handle` must be null or live; `out` null or valid for writes.
 */
enum EdgecacheStatus edgecache_analytic_load_exact(const struct EdgecacheScenario *handle,
                                                   uint32_t scheme,
                                                   char **out);

/**
 * Exact expected load by enumerating every request vector, as `"n/d"`.
 * `max_states = 0` uses the default budget.
 *
 * # Safety
 * `handle` must be null or live; `out` null or valid for writes.
 */
enum EdgecacheStatus edgecache_exact_expected_load(const struct EdgecacheScenario *handle,
                                                   uint32_t scheme,
                                                   uint64_t max_states,
                                                   char **out);

/**
 * Monte Carlo estimate over `trials` seeded realizations.
 *
 * # Safety
 * `handle` must be null or live; `out` null or valid for writes.
 */
enum EdgecacheStatus edgecache_monte_carlo(const struct EdgecacheScenario *handle,
                                           uint32_t scheme,
                                           uint64_t trials,
                                           uint64_t seed,
                                           struct EdgecacheLoadReport *out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void edgecache_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDGECACHE_H */
