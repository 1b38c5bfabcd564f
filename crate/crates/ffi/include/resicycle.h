#ifndef RESICYCLE_H
#define RESICYCLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcRecoveryType {
  RC_RECOVERY_TYPE_COLLAPSE = 0,
  RC_RECOVERY_TYPE_INSUFFICIENT = 1,
  RC_RECOVERY_TYPE_LEVELED = 2,
  RC_RECOVERY_TYPE_ADAPTIVE = 3,
} RcRecoveryType;

typedef enum RcRestabDenominator {
  RC_RESTAB_DENOMINATOR_EQ4 = 0,
  RC_RESTAB_DENOMINATOR_APPENDIX = 1,
} RcRestabDenominator;

typedef enum RcStatus {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_ARGUMENT = 2,
  RC_STATUS_CONFIG = 3,
  RC_STATUS_PARSE = 4,
  RC_STATUS_INSUFFICIENT_DATA = 5,
  RC_STATUS_DEGENERATE_CYCLE = 6,
  RC_STATUS_INSUFFICIENT_TAIL = 7,
  RC_STATUS_IO = 8,
  RC_STATUS_OUT_OF_RANGE = 9,
  RC_STATUS_INTERNAL = 10,
} RcStatus;

// Result of running the pipeline on one series.
typedef struct RcAnalysis RcAnalysis;

// Run configuration, keyed like the CLI's dotted options.
typedef struct RcConfig RcConfig;

typedef struct RcTolerance {
  double p_rr;
  double p_et;
  enum RcRestabDenominator restab_denominator;
} RcTolerance;

typedef struct RcCycle {
  size_t t_pre;
  size_t t_event;
  size_t t_post;
  double p_pre;
  double p_event;
  double p_post;
} RcCycle;

// Elemental functions and RI for one cycle.
typedef struct RcElementals {
  double r_m;
  double r_e;
  double s_f;
  double s_r;
  double r_d;
  double r_s;
  double ri;
} RcElementals;

typedef struct RcCycleScores {
  // Index of the cycle among all identified cycles.
  size_t index;
  struct RcCycle cycle;
  double rr_width;
  double et;
  struct RcElementals elementals;
  double r1;
  double r2;
  double r3;
  enum RcRecoveryType recovery_type;
} RcCycleScores;

typedef struct RcTailFit {
  double alpha;
  double x_min;
  size_t n_tail;
  size_t n;
  double ks_stat;
  // NaN when no bootstrap was run.
  double p_mean;
} RcTailFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *rc_last_error(void);

// Library version as a static NUL-terminated string.
const char *rc_version(void);

// Default tolerance thresholds.
struct RcTolerance rc_tolerance_default(void);

// New configuration with default values. Free with [`rc_config_free`].
struct RcConfig *rc_config_new(void);

// # Safety
// `config` must be NULL or a pointer returned by [`rc_config_new`] that has
// not been freed.
void rc_config_free(struct RcConfig *config);

// Sets one option by its dotted key (e.g. `metric.p_et`).
//
// # Safety
// `config` must be a live handle; `key` and `value` NUL-terminated strings.
enum RcStatus rc_config_set(struct RcConfig *config, const char *key, const char *value);

// Runs the pipeline on a CSV file. On success `*out` receives a handle to
// free with [`rc_analysis_free`].
//
// # Safety
// `config` must be a live handle, `path` a NUL-terminated string and `out`
// writable.
enum RcStatus rc_analysis_from_csv_path(const struct RcConfig *config,
                                        const char *path,
                                        struct RcAnalysis **out);

// Runs the pipeline on CSV text held in memory.
//
// # Safety
// `data` must point to `len` readable bytes; other pointers as for
// [`rc_analysis_from_csv_path`].
enum RcStatus rc_analysis_from_csv_buffer(const struct RcConfig *config,
                                          const uint8_t *data,
                                          size_t len,
                                          struct RcAnalysis **out);

// # Safety
// `analysis` must be NULL or a live handle.
void rc_analysis_free(struct RcAnalysis *analysis);

// Number of scored cycles, or 0 for NULL.
//
// # Safety
// `analysis` must be NULL or a live handle.
size_t rc_analysis_score_count(const struct RcAnalysis *analysis);

// Number of cycles that could not be scored, or 0 for NULL.
//
// # Safety
// `analysis` must be NULL or a live handle.
size_t rc_analysis_skipped_count(const struct RcAnalysis *analysis);

// Length of the (normalized, smoothed) series, or 0 for NULL.
//
// # Safety
// `analysis` must be NULL or a live handle.
size_t rc_analysis_series_len(const struct RcAnalysis *analysis);

// Copies the scores of the `i`-th scored cycle into `*out`.
//
// # Safety
// `analysis` must be a live handle and `out` writable.
enum RcStatus rc_analysis_get_scores(const struct RcAnalysis *analysis,
                                     size_t i,
                                     struct RcCycleScores *out);

// Elemental functions and RI of a single cycle.
//
// # Safety
// `cycle` and `tolerance` must be readable, `out` writable.
enum RcStatus rc_score_cycle(const struct RcCycle *cycle,
                             const struct RcTolerance *tolerance,
                             struct RcElementals *out);

// Power-law fit of the upper tail of `values`. With `reps > 0` a bootstrap
// goodness-of-fit test fills `p_mean`; otherwise `p_mean` is NaN.
//
// # Safety
// `values` must point to `len` readable doubles and `out` be writable.
enum RcStatus rc_fit_power_law(const double *values,
                               size_t len,
                               size_t reps,
                               uint64_t seed,
                               size_t batch_size,
                               struct RcTailFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESICYCLE_H */
