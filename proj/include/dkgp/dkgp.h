/* dkgp — deep-kernel GP return forecasting and volatility benchmarking.
 *
 * C API of the shared library. All functions are thread-compatible: distinct
 * handles may be used from distinct threads; a single handle must not be
 * shared without external synchronization. Strings returned through
 * `const char*` output parameters are owned by the handle and stay valid
 * until the next call on that handle (or its destruction); strings returned
 * through `char**` are heap-allocated and must be released with
 * dkgp_string_free().
 */
#ifndef DKGP_H
#define DKGP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DKGP_API __declspec(dllexport)
#else
#define DKGP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dkgp_status {
  DKGP_OK = 0,
  DKGP_E_ARG = 1,     /* invalid argument or config value */
  DKGP_E_PARSE = 2,   /* malformed config/data text (message has context) */
  DKGP_E_IO = 3,      /* filesystem failure (message has the path) */
  DKGP_E_NUMERIC = 4, /* numerical failure: non-PSD matrix, divergence, ... */
  DKGP_E_STATE = 5,   /* call sequence misuse, e.g. results before execute */
  DKGP_E_INTERNAL = 6 /* unexpected failure */
} dkgp_status;

/* Opaque pipeline run: config + (after execute) its results. */
typedef struct dkgp_run dkgp_run;

typedef void (*dkgp_log_fn)(const char* line, void* user_data);

/* Library semantic version, static storage. */
DKGP_API const char* dkgp_version(void);

/* Message for the most recent failing call on this thread. Empty string if
 * none. Overwritten by the next failure on the same thread. */
DKGP_API const char* dkgp_last_error(void);

/* Create a run from a JSON config document (the text itself, not a path). */
DKGP_API dkgp_status dkgp_run_create(const char* config_json, dkgp_run** out);

/* Create a run from a JSON config file. */
DKGP_API dkgp_status dkgp_run_create_from_file(const char* path,
                                               dkgp_run** out);

/* Install a progress logger (fn = NULL disables). Lines are diagnostic only
 * and never part of report files. */
DKGP_API dkgp_status dkgp_run_set_logger(dkgp_run* run, dkgp_log_fn fn,
                                         void* user_data);

/* Field overrides, applied before validation/execution. */
DKGP_API dkgp_status dkgp_run_set_seed(dkgp_run* run, uint64_t seed);
DKGP_API dkgp_status dkgp_run_set_out_dir(dkgp_run* run, const char* dir);
DKGP_API dkgp_status dkgp_run_set_models(dkgp_run* run, const char* const* ids,
                                         size_t n);
DKGP_API dkgp_status dkgp_run_set_ks(dkgp_run* run, const int* ks, size_t n);
/* Replace the data source with the built-in synthetic generator (keeps the
 * config's synthetic block when present, defaults otherwise). */
DKGP_API dkgp_status dkgp_run_use_synthetic(dkgp_run* run);

/* Check config invariants without running the pipeline. */
DKGP_API dkgp_status dkgp_run_validate(const dkgp_run* run);

/* Run ingest -> fit -> rolling forecasts -> backtests -> evaluation.
 * Deterministic for a given (config, seed). */
DKGP_API dkgp_status dkgp_run_execute(dkgp_run* run);

/* After execute: write report.json + CSV tables into dir (NULL = the
 * config's output directory). Byte-identical across reruns. */
DKGP_API dkgp_status dkgp_run_emit_report(dkgp_run* run, const char* dir);

/* After execute: the report document. Owned by the handle. */
DKGP_API dkgp_status dkgp_run_report_json(dkgp_run* run,
                                          const char** out_json);

/* After execute: pipeline wall-clock seconds (diagnostic only). */
DKGP_API dkgp_status dkgp_run_wall_seconds(const dkgp_run* run, double* out);

/* Generate a synthetic dataset and write it as a log-return CSV
 * (`date,stock_id,log_return`). The config must use the synthetic source. */
DKGP_API dkgp_status dkgp_synth_csv(const char* config_json,
                                    const char* out_path);

/* Parse and validate an input CSV; on success *out_json describes the
 * per-stock series (id, rows, date range). Free with dkgp_string_free(). */
DKGP_API dkgp_status dkgp_ingest_check(const char* csv_path, char** out_json);

DKGP_API void dkgp_string_free(char* s);

DKGP_API void dkgp_run_destroy(dkgp_run* run);

#ifdef __cplusplus
}
#endif

#endif /* DKGP_H */
