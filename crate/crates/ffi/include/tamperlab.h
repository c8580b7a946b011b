#ifndef TAMPERLAB_H
#define TAMPERLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TlStatus {
  TL_STATUS_OK = 0,
  TL_STATUS_NULL_POINTER = 1,
  TL_STATUS_INVALID_UTF8 = 2,
  TL_STATUS_INVALID_CONFIG = 3,
  TL_STATUS_HASH_MISMATCH = 4,
  TL_STATUS_DIMENSION_CAP = 5,
  TL_STATUS_OUT_OF_RANGE = 6,
  TL_STATUS_IO = 7,
  TL_STATUS_NUMERICAL = 8,
  TL_STATUS_PANIC = 9,
} TlStatus;

/**
 * Parsed experiment configuration.
 */
typedef struct TlConfig TlConfig;

/**
 * Result of one suite run.
 */
typedef struct TlReport TlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *tl_last_error(void);

/**
 * Library version as a static string.
 */
const char *tl_version(void);

/**
 * Parses a JSON experiment config.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum TlStatus tl_config_from_json(const char *json, struct TlConfig **out);

/**
 * Creates the default config of a suite.
 *
 * # Safety
 * `suite` must be a nul-terminated string and `out` a valid pointer.
 */
enum TlStatus tl_config_new(const char *suite, uint64_t seed, struct TlConfig **out);

/**
 * Hex SHA-256 of the run-determining fields. Free with [`tl_string_free`].
 *
 * # Safety
 * `cfg` must come from this library and `out` be a valid pointer.
 */
enum TlStatus tl_config_hash(const struct TlConfig *cfg, char **out);

/**
 * # Safety
 * `cfg` must come from [`tl_config_from_json`] or [`tl_config_new`] and not
 * be freed twice. Null is ignored.
 */
void tl_config_free(struct TlConfig *cfg);

/**
 * Runs a suite with `workers` threads. A violated check is not an error:
 * the call succeeds and [`tl_report_passed`] reports it.
 *
 * # Safety
 * `cfg` must come from this library and `out` be a valid pointer.
 */
enum TlStatus tl_run(const struct TlConfig *cfg, size_t workers, struct TlReport **out);

/**
 * 1 if every check passed, 0 otherwise, -1 for a null handle.
 *
 * # Safety
 * `report` must be null or come from this library.
 */
int32_t tl_report_passed(const struct TlReport *report);

/**
 * Number of checks, 0 for a null handle.
 *
 * # Safety
 * `report` must be null or come from this library.
 */
size_t tl_report_check_count(const struct TlReport *report);

/**
 * Value, bound and pass flag of check `index`.
 *
 * # Safety
 * `report` must come from this library; the out pointers must be valid.
 */
enum TlStatus tl_report_check(const struct TlReport *report,
                              size_t index,
                              double *value,
                              double *bound,
                              int32_t *passed);

/**
 * Name of check `index`. Free with [`tl_string_free`].
 *
 * # Safety
 * `report` must come from this library and `out` be a valid pointer.
 */
enum TlStatus tl_report_check_name(const struct TlReport *report, size_t index, char **out);

/**
 * Full report as JSON. Free with [`tl_string_free`].
 *
 * # Safety
 * `report` must come from this library and `out` be a valid pointer.
 */
enum TlStatus tl_report_to_json(const struct TlReport *report, char **out);

/**
 * # Safety
 * `report` must come from [`tl_run`] and not be freed twice. Null is ignored.
 */
void tl_report_free(struct TlReport *report);

/**
 * Re-runs a JSON report and sets `matches` to 1 when every value agrees.
 * An edited config yields [`TlStatus::HashMismatch`].
 *
 * # Safety
 * `json` must be a nul-terminated string and `matches` a valid pointer.
 */
enum TlStatus tl_replay_json(const char *json, int32_t *matches);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void tl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAMPERLAB_H */
