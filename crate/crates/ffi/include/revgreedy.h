#ifndef REVGREEDY_H
#define REVGREEDY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RG_OK 0

#define RG_ERR_NULL 1

#define RG_ERR_INVALID_ARGUMENT 2

#define RG_ERR_ILLEGAL_STEP 3

#define RG_ERR_CAP_EXCEEDED 4

#define RG_ERR_PARSE 5

#define RG_ERR_PANIC 6

/**
 * Tie policy selector for `rg_reverse_greedy`.
 */
#define RG_POLICY_LOWEST_INDEX 0

#define RG_POLICY_SEEDED_RANDOM 1

/**
 * A metric space, with the lower-bound construction attached when it came
 * from `rg_instance_lowerbound`.
 */
typedef struct RgInstance RgInstance;

/**
 * The removal record of one reverse greedy run.
 */
typedef struct RgTrace RgTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread; do not free.
 */
const char *rg_last_error(void);

/**
 * Builds the adversarial star instance for `k`. `n == 0` means no padding.
 *
 * # Safety
 * `out_instance` must be a valid pointer.
 */
int32_t rg_instance_lowerbound(size_t k, size_t n, struct RgInstance **out_instance);

/**
 * Builds an instance from a row-major `n × n` distance matrix. With
 * `exact != 0` entries must be non-negative integers.
 *
 * # Safety
 * `dist` must point to `n * n` doubles; `out_instance` must be valid.
 */
int32_t rg_instance_from_matrix(size_t n,
                                const double *dist,
                                int32_t exact,
                                struct RgInstance **out_instance);

/**
 * Parses an instance file's JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out_instance` must be valid.
 */
int32_t rg_instance_from_json(const char *json, struct RgInstance **out_instance);

/**
 * # Safety
 * `instance` must come from an `rg_instance_*` constructor, or be null.
 */
void rg_instance_free(struct RgInstance *instance);

/**
 * Number of points.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t rg_instance_len(const struct RgInstance *instance, size_t *out_n);

/**
 * The instance's stored k, or 0 if it has none.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t rg_instance_k(const struct RgInstance *instance, size_t *out_k);

/**
 * Distance between points `a` and `b`.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t rg_instance_distance(const struct RgInstance *instance, size_t a, size_t b, double *out_d);

/**
 * Runs reverse greedy down to `k` facilities. `policy` is one of the
 * `RG_POLICY_*` values; `seed` is used by the seeded policy only.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t rg_reverse_greedy(const struct RgInstance *instance,
                          size_t k,
                          int32_t policy,
                          uint64_t seed,
                          struct RgTrace **out_trace);

/**
 * Runs reverse greedy following `sequence`; every entry must be a legal
 * greedy choice. With `sequence == NULL` a lower-bound instance uses its
 * own scripted schedule.
 *
 * # Safety
 * `sequence` must point to `len` values or be null; other pointers valid.
 */
int32_t rg_reverse_greedy_scripted(const struct RgInstance *instance,
                                   size_t k,
                                   const size_t *sequence,
                                   size_t len,
                                   struct RgTrace **out_trace);

/**
 * # Safety
 * `trace` must come from `rg_reverse_greedy*`, or be null.
 */
void rg_trace_free(struct RgTrace *trace);

/**
 * Number of removals.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t rg_trace_len(const struct RgTrace *trace, size_t *out_len);

/**
 * Removal `i` and the cost after it.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t rg_trace_step(const struct RgTrace *trace, size_t i, size_t *out_removed, double *out_cost);

/**
 * Cost of the surviving facility set.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t rg_trace_final_cost(const struct RgTrace *trace, double *out_cost);

/**
 * Copies the surviving facilities (ascending) into `buf`. `out_len`
 * receives the full count even when `cap` is too small, in which case
 * `RG_ERR_INVALID_ARGUMENT` is returned and nothing is copied.
 *
 * # Safety
 * `buf` must hold `cap` values (may be null when `cap == 0`).
 */
int32_t rg_trace_final_set(const struct RgTrace *trace, size_t *buf, size_t cap, size_t *out_len);

/**
 * Trace JSON. Release with `rg_string_free`.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t rg_trace_to_json(const struct RgTrace *trace, char **out_json);

/**
 * # Safety
 * `s` must come from this library, or be null.
 */
void rg_string_free(char *s);

/**
 * Optimal k-center cost. Lower-bound instances report their known optimum;
 * others are solved exactly, with subset enumeration up to `enumeration_cap`
 * points (0 selects the default).
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t rg_exact_opt(const struct RgInstance *instance,
                     size_t k,
                     size_t enumeration_cap,
                     double *out_opt);

/**
 * Replays the scripted adversarial schedule for `k` with legality checks.
 * `out_passed` is 1 when every step is a greedy argmin and the run ends at
 * cost 2k − 2 on the designated survivors.
 *
 * # Safety
 * Pointers must be valid.
 */
int32_t rg_verify_lower(size_t k, int32_t *out_passed, double *out_final_cost);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REVGREEDY_H */
