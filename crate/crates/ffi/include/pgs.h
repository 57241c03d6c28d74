#ifndef PGS_H
#define PGS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PgsStatus {
  PGS_STATUS_OK = 0,
  PGS_STATUS_NULL_POINTER = 1,
  PGS_STATUS_INVALID_ARGUMENT = 2,
  PGS_STATUS_INVALID_CONFIG = 3,
  PGS_STATUS_DIVERGED = 4,
  PGS_STATUS_BUFFER_TOO_SMALL = 5,
  PGS_STATUS_IO = 6,
  PGS_STATUS_INTERNAL = 7,
} PgsStatus;

typedef enum PgsTermination {
  PGS_TERMINATION_CLOSEST_APPROACH = 0,
  PGS_TERMINATION_GROUND_IMPACT = 1,
  PGS_TERMINATION_TIMEOUT = 2,
  PGS_TERMINATION_OBSERVER_DIVERGENCE = 3,
} PgsTermination;

typedef enum PgsSource {
  PGS_SOURCE_TRUE = 0,
  PGS_SOURCE_DELAYED = 1,
  PGS_SOURCE_PREDICTED = 2,
} PgsSource;

/**
 * Opaque simulation configuration handle.
 */
typedef struct PgsConfig PgsConfig;

/**
 * Opaque observer handle.
 */
typedef struct PgsObserver PgsObserver;

/**
 * Predicted signal and derivatives at `t + delta`.
 */
typedef struct PgsPrediction {
  double value;
  double d1;
  double d2;
  double d3;
} PgsPrediction;

/**
 * Scalar metrics of one engagement. Unavailable RMSE values are NaN.
 */
typedef struct PgsMetrics {
  double miss_distance;
  double miss_time;
  double rmse_delayed;
  double rmse_predicted;
  double peak_accel_cmd;
  double integrated_abs_deflection;
  double duration;
  uint64_t steps;
  enum PgsTermination termination;
} PgsMetrics;

typedef struct PgsGroupStats {
  double delay;
  enum PgsSource source;
  double mean_miss;
  double std_miss;
  uint64_t n;
  uint64_t failure_count;
} PgsGroupStats;

typedef struct PgsAtmosphere {
  double density;
  double speed_of_sound;
  double temperature;
  double pressure;
} PgsAtmosphere;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *pgs_last_error_message(void);

/**
 * Creates an observer. Gains must pass the Hurwitz test.
 *
 * # Safety
 * `out` must be null or point to writable storage for a pointer.
 */
enum PgsStatus pgs_observer_new(double k1,
                                double k2,
                                double k3,
                                double k4,
                                double epsilon,
                                double delta,
                                struct PgsObserver **out);

/**
 * # Safety
 * `obs` must be null or a handle from `pgs_observer_new` not yet freed.
 */
void pgs_observer_free(struct PgsObserver *obs);

/**
 * Seeds both observer steps with the first signal sample.
 *
 * # Safety
 * `obs` must be null or a live observer handle.
 */
enum PgsStatus pgs_observer_reset(struct PgsObserver *obs, double v0);

/**
 * Advances one step with `v` held over `dt`. `out` may be null.
 *
 * # Safety
 * `obs` must be null or a live observer handle; `out` null or writable.
 */
enum PgsStatus pgs_observer_step(struct PgsObserver *obs,
                                 double v,
                                 double dt,
                                 struct PgsPrediction *out);

/**
 * # Safety
 * `obs` must be null or a live observer handle; `out` null or writable.
 */
enum PgsStatus pgs_observer_prediction(const struct PgsObserver *obs, struct PgsPrediction *out);

/**
 * Default configuration.
 *
 * # Safety
 * `out` must be null or point to writable storage for a pointer.
 */
enum PgsStatus pgs_config_default(struct PgsConfig **out);

/**
 * Parses a JSON configuration. Missing keys take their defaults; unknown
 * keys and invalid values are rejected.
 *
 * # Safety
 * `json` must be null or a NUL-terminated string; `out` null or writable.
 */
enum PgsStatus pgs_config_from_json(const char *json, struct PgsConfig **out);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void pgs_config_free(struct PgsConfig *cfg);

/**
 * # Safety
 * `cfg` must be null or a live config handle.
 */
enum PgsStatus pgs_config_set_seed(struct PgsConfig *cfg, uint64_t seed);

/**
 * Fully resolved configuration as JSON. Release with `pgs_string_free`.
 *
 * # Safety
 * `cfg` must be null or a live config handle; `out` null or writable.
 */
enum PgsStatus pgs_config_to_json(const struct PgsConfig *cfg, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void pgs_string_free(char *s);

/**
 * Runs one engagement. A run that ends in observer divergence still fills
 * `out` and returns `PGS_STATUS_DIVERGED`.
 *
 * # Safety
 * `cfg` must be null or a live config handle; `out` null or writable.
 */
enum PgsStatus pgs_run_engagement(const struct PgsConfig *cfg, struct PgsMetrics *out);

/**
 * Runs the Monte-Carlo sweep described by `cfg` on `jobs` threads (0 for
 * all cores) and writes one entry per `(delay, source)` group.
 *
 * `*count` receives the number of groups. If `capacity` is too small,
 * nothing is written to `groups` and `PGS_STATUS_BUFFER_TOO_SMALL` is
 * returned; call again with a larger buffer.
 *
 * # Safety
 * `cfg` must be null or a live config handle; `groups` must be null or
 * point to `capacity` writable entries; `count` null or writable.
 */
enum PgsStatus pgs_run_sweep(const struct PgsConfig *cfg,
                             uint32_t jobs,
                             struct PgsGroupStats *groups,
                             size_t capacity,
                             size_t *count);

/**
 * Standard atmosphere at `altitude` metres.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum PgsStatus pgs_atmosphere(double altitude, struct PgsAtmosphere *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PGS_H */
