#ifndef NOMA_SECRECY_H
#define NOMA_SECRECY_H

/* Generated by cbindgen from the noma-secrecy-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NsStatus {
  NS_STATUS_OK = 0,
  NS_STATUS_NULL_POINTER = 1,
  NS_STATUS_INVALID_CONFIG = 2,
  NS_STATUS_NUMERICAL = 3,
  NS_STATUS_INVALID_ARGUMENT = 4,
  NS_STATUS_PANIC = 5,
} NsStatus;

typedef enum NsScenario {
  NS_SCENARIO_EXTERNAL_N = 0,
  NS_SCENARIO_EXTERNAL_M = 1,
  NS_SCENARIO_EXTERNAL_PAIR = 2,
  NS_SCENARIO_INTERNAL = 3,
} NsScenario;

/**
 * A validated system configuration.
 */
typedef struct NsConfig NsConfig;

/**
 * Analytic evaluator bound to one configuration.
 */
typedef struct NsEngine NsEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ns_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ns_version(void);

/**
 * Creates the default configuration.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum NsStatus ns_config_default(struct NsConfig **out);

/**
 * Creates a configuration from a JSON object. Keys that are absent keep
 * their default values; unknown keys are rejected.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum NsStatus ns_config_from_json(const char *json, struct NsConfig **out);

/**
 * Sets the legitimate-user transmit SNR in dB.
 *
 * # Safety
 * `cfg` must come from this library and not be freed.
 */
enum NsStatus ns_config_set_rho_db(struct NsConfig *cfg, double rho_db);

/**
 * # Safety
 * `cfg` must come from [`ns_config_default`] or [`ns_config_from_json`],
 * or be null. It must not be used afterwards.
 */
void ns_config_free(struct NsConfig *cfg);

/**
 * Builds an analytic engine for a configuration. The configuration is
 * copied; it may be freed independently.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum NsStatus ns_engine_new(const struct NsConfig *cfg, struct NsEngine **out);

/**
 * # Safety
 * `engine` must come from [`ns_engine_new`] or be null.
 */
void ns_engine_free(struct NsEngine *engine);

/**
 * Exact SOP, clamped to `[0, 1]`.
 *
 * # Safety
 * `engine` must be a live handle and `out` writable.
 */
enum NsStatus ns_sop_exact(const struct NsEngine *engine, enum NsScenario scenario, double *out);

/**
 * High-SNR SOP, clamped to `[0, 1]`.
 *
 * # Safety
 * `engine` must be a live handle and `out` writable.
 */
enum NsStatus ns_sop_asymptotic(const struct NsEngine *engine,
                                enum NsScenario scenario,
                                double *out);

/**
 * Monte Carlo SOP and its 95% half width. Deterministic for a seed.
 *
 * # Safety
 * `cfg` must be a live handle; `value` and `ci_half_width` writable.
 */
enum NsStatus ns_sop_monte_carlo(const struct NsConfig *cfg,
                                 enum NsScenario scenario,
                                 uint64_t iterations,
                                 uint64_t seed,
                                 double *value,
                                 double *ci_half_width);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOMA_SECRECY_H */
