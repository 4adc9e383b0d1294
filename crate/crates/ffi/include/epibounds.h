#ifndef EPIBOUNDS_H
#define EPIBOUNDS_H

#pragma once

/* Generated by cbindgen from epibounds-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum EbStatus {
  EB_STATUS_OK = 0,
  // A required pointer argument was NULL.
  EB_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  EB_STATUS_INVALID_UTF8 = 2,
  // Bad configuration (JSON schema, unknown method name, missing section).
  EB_STATUS_CONFIG = 3,
  // The feed failed validation (malformed rows, broken invariants).
  EB_STATUS_DATA = 4,
  // The data refute the maintained assumptions (crossed bounds).
  EB_STATUS_INCONSISTENCY = 5,
  // Filesystem problem.
  EB_STATUS_IO = 6,
  // Index out of range.
  EB_STATUS_OUT_OF_RANGE = 7,
  // An internal panic was caught at the boundary.
  EB_STATUS_PANIC = 8,
} EbStatus;

// Opaque handle: a computed per-date bound series.
typedef struct EbBoundSeries EbBoundSeries;

// Opaque handle: a validated surveillance series plus its run config.
typedef struct EbSeries EbSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message for this thread. Never NULL; empty before any error.
// The pointer stays valid until the next failing call on the same thread.
const char *eb_last_error(void);

// Library version as a static NUL-terminated string.
const char *eb_version(void);

// Parse a surveillance CSV (text) against a run config (JSON) and return a
// series handle through `out`. The analysis window from the config is
// applied. On error `out` is untouched.
//
// # Safety
// `csv_text` and `config_json` must be NUL-terminated strings; `out` must
// be a valid pointer to pointer storage.
enum EbStatus eb_series_parse(const char *csv_text, const char *config_json, struct EbSeries **out);

// Like [`eb_series_parse`] but reads the CSV from a file path.
//
// # Safety
// `csv_path` and `config_json` must be NUL-terminated strings; `out` must
// be a valid pointer to pointer storage.
enum EbStatus eb_series_load_csv(const char *csv_path,
                                 const char *config_json,
                                 struct EbSeries **out);

// Number of dates in the series. NULL yields 0.
//
// # Safety
// `series` must be NULL or a live handle from this library.
uintptr_t eb_series_len(const struct EbSeries *series);

// Release a series handle. NULL is a no-op.
//
// # Safety
// `series` must be NULL or a live handle; it must not be used afterwards.
void eb_series_free(struct EbSeries *series);

// Compute a bound series with the handle's configured assumptions.
// `method` is one of `worst_case`, `testing_monotone`, `temporal_envelope`
// (alias `envelope`), `asym_refined`.
//
// # Safety
// `series` must be a live handle, `method` a NUL-terminated string, `out`
// valid pointer storage.
enum EbStatus eb_bounds_compute(const struct EbSeries *series,
                                const char *method,
                                struct EbBoundSeries **out);

// Number of dates in a bound series. NULL yields 0.
//
// # Safety
// `bounds` must be NULL or a live handle from this library.
uintptr_t eb_bounds_len(const struct EbBoundSeries *bounds);

// Fetch the interval at `index`. Any output pointer may be NULL to skip
// that field.
//
// # Safety
// `bounds` must be a live handle; non-NULL outputs must be valid storage.
enum EbStatus eb_bounds_get(const struct EbBoundSeries *bounds,
                            uintptr_t index,
                            double *lo,
                            double *hi,
                            bool *clamped);

// Write the ISO-8601 date at `index` into `buf` (NUL-terminated). `buf_len`
// must be at least 11.
//
// # Safety
// `bounds` must be a live handle; `buf` must point to `buf_len` writable
// bytes.
enum EbStatus eb_bounds_date(const struct EbBoundSeries *bounds,
                             uintptr_t index,
                             char *buf,
                             uintptr_t buf_len);

// Release a bound-series handle. NULL is a no-op.
//
// # Safety
// `bounds` must be NULL or a live handle; it must not be used afterwards.
void eb_bounds_free(struct EbBoundSeries *bounds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPIBOUNDS_H */
