#ifndef QUASISTABLE_H
#define QUASISTABLE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QsStatus {
  QS_STATUS_OK = 0,
  QS_STATUS_NULL_POINTER = 1,
  QS_STATUS_INVALID_UTF8 = 2,
  QS_STATUS_INPUT = 3,
  QS_STATUS_FORMAT = 4,
  QS_STATUS_PRECONDITION = 5,
  QS_STATUS_TOO_LARGE = 6,
  QS_STATUS_VIOLATION = 7,
  QS_STATUS_INTERNAL = 8,
  QS_STATUS_IO = 9,
  QS_STATUS_PANIC = 10,
} QsStatus;

typedef enum QsFamily {
  QS_FAMILY_GREEDY_ONLY = 0,
  QS_FAMILY_MIXED = 1,
} QsFamily;

/**
 * An immutable market.
 */
typedef struct QsMarket QsMarket;

/**
 * A completed deferred-acceptance run together with the market it ran on.
 */
typedef struct QsTrace QsTrace;

typedef struct QsCheck {
  bool is_allocation;
  bool individually_rational;
  bool quasi_stable;
  bool stable;
} QsCheck;

typedef struct QsGenParams {
  size_t n_workers;
  size_t n_firms;
  size_t max_contracts_per_pair;
  double density;
  size_t quota_min;
  size_t quota_max;
  double acceptability_rate;
  uint64_t seed;
  /**
   * A [`QsFamily`] value.
   */
  uint32_t family;
} QsGenParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qs_version(void);

/**
 * Message of the last failed call on this thread, or null after a successful call.
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *qs_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library that has not been freed.
 */
void qs_string_free(char *s);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum QsStatus qs_market_from_json(const char *json, struct QsMarket **out_market);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum QsStatus qs_market_load(const char *path, struct QsMarket **out_market);

/**
 * # Safety
 * `market` must be null or a handle from this library that has not been freed.
 */
void qs_market_free(struct QsMarket *market);

/**
 * Number of contracts, or 0 for a null handle.
 *
 * # Safety
 * `market` must be null or a live handle.
 */
size_t qs_market_num_contracts(const struct QsMarket *market);

/**
 * # Safety
 * `market` must be a live handle; `out_json` must be writable.
 */
enum QsStatus qs_market_to_json(const struct QsMarket *market, char **out_json);

/**
 * The market with the roles of workers and firms exchanged.
 *
 * # Safety
 * `market` must be a live handle; `out_market` must be writable.
 */
enum QsStatus qs_market_dualize(const struct QsMarket *market, struct QsMarket **out_market);

/**
 * Stability predicates of `allocation` in the view spanned by `workers` and
 * `firms` (null selects a whole side).
 *
 * # Safety
 * `market` must be a live handle, string arguments NUL-terminated or null where
 * allowed, `out_check` writable.
 */
enum QsStatus qs_check(const struct QsMarket *market,
                       const char *workers,
                       const char *firms,
                       const char *allocation,
                       struct QsCheck *out_check);

/**
 * Contracts blocking `allocation`, as an id list.
 *
 * # Safety
 * As for [`qs_check`]; `out_set` must be writable.
 */
enum QsStatus qs_blocking_contracts(const struct QsMarket *market,
                                    const char *workers,
                                    const char *firms,
                                    const char *allocation,
                                    char **out_set);

/**
 * The worker-pessimal stable allocation of the view.
 *
 * # Safety
 * As for [`qs_check`]; `out_set` must be writable.
 */
enum QsStatus qs_worker_pessimal(const struct QsMarket *market,
                                 const char *workers,
                                 const char *firms,
                                 char **out_set);

/**
 * Least fixed point of the Tarski operator above `allocation`.
 *
 * # Safety
 * As for [`qs_check`]; `out_set` must be writable.
 */
enum QsStatus qs_tarski(const struct QsMarket *market,
                        const char *workers,
                        const char *firms,
                        const char *allocation,
                        char **out_set);

/**
 * Workers' join of two quasi-stable allocations.
 *
 * # Safety
 * As for [`qs_check`]; `out_set` must be writable.
 */
enum QsStatus qs_join(const struct QsMarket *market,
                      const char *workers,
                      const char *firms,
                      const char *left,
                      const char *right,
                      char **out_set);

/**
 * Runs deferred acceptance from the quasi-stable `start`. `strategy` is `"full"`,
 * `"single"` or `"random"` (null means `"full"`); `seed` is used by `"random"`.
 *
 * # Safety
 * As for [`qs_check`]; `out_trace` must be writable.
 */
enum QsStatus qs_da_run(const struct QsMarket *market,
                        const char *workers,
                        const char *firms,
                        const char *start,
                        const char *strategy,
                        uint64_t seed,
                        struct QsTrace **out_trace);

/**
 * # Safety
 * `trace` must be null or a handle from this library that has not been freed.
 */
void qs_trace_free(struct QsTrace *trace);

/**
 * Number of steps taken, or 0 for a null handle.
 *
 * # Safety
 * `trace` must be null or a live handle.
 */
size_t qs_trace_len(const struct QsTrace *trace);

/**
 * The allocation after `step` steps; step 0 is the start.
 *
 * # Safety
 * `trace` must be a live handle; `out_set` must be writable.
 */
enum QsStatus qs_trace_allocation(const struct QsTrace *trace, size_t step, char **out_set);

/**
 * # Safety
 * `trace` must be a live handle; `out_set` must be writable.
 */
enum QsStatus qs_trace_outcome(const struct QsTrace *trace, char **out_set);

/**
 * The trace in the command-line text format.
 *
 * # Safety
 * `trace` must be a live handle; `out_text` must be writable.
 */
enum QsStatus qs_trace_to_text(const struct QsTrace *trace, char **out_text);

/**
 * Exhaustive enumeration of the view as JSON with keys `allocations`,
 * `individually_rational`, `quasi_stable` and `stable` (arrays of id arrays).
 *
 * # Safety
 * As for [`qs_check`]; `out_json` must be writable.
 */
enum QsStatus qs_enumerate(const struct QsMarket *market,
                           const char *workers,
                           const char *firms,
                           char **out_json);

/**
 * Cross-checks the structural results on the view by exhaustive enumeration.
 *
 * # Safety
 * As for [`qs_check`]; `out_passed` must be writable.
 */
enum QsStatus qs_certify(const struct QsMarket *market,
                         const char *workers,
                         const char *firms,
                         bool *out_passed);

/**
 * Verifies every agent's choice function and stores the number of failed checks.
 *
 * # Safety
 * `market` must be a live handle; `out_failed` must be writable.
 */
enum QsStatus qs_verify_prefs(const struct QsMarket *market, size_t *out_failed);

/**
 * Default generator parameters.
 */
struct QsGenParams qs_gen_params_default(void);

/**
 * # Safety
 * `params` must point to a readable parameter block; `out_market` must be writable.
 */
enum QsStatus qs_gen(const struct QsGenParams *params, struct QsMarket **out_market);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUASISTABLE_H */
