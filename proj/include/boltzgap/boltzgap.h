#ifndef BOLTZGAP_H
#define BOLTZGAP_H

/* C interface of the boltzgap library: configure a sweep, run it, read the
   result records, write them out. All functions return a bg_status; on
   failure bg_last_error() describes the problem (per thread). */

#include <stddef.h>
#include <stdint.h>

#if defined(BOLTZGAP_BUILDING)
#define BG_API __attribute__((visibility("default")))
#else
#define BG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bg_status {
  BG_OK = 0,
  BG_INVALID_ARGUMENT = 1,
  BG_SINGULAR_EVALUATION = 2,
  BG_NOT_APPLICABLE = 3,
  BG_MEMORY_BUDGET = 4,
  BG_TOLERANCE_NOT_MET = 5,
  BG_RANK_DEFICIENT = 6,
  BG_ILL_CONDITIONED = 7,
  BG_NOT_POSITIVE_DEFINITE = 8,
  BG_REPRESENTATION_MISMATCH = 9,
  BG_IO = 10,
  BG_DIAGNOSTIC = 11,
  BG_POINT_FAILED = 12, /* bg_run: some sweep points failed, the rest are valid */
  BG_INTERNAL = 99
} bg_status;

#define BG_RECORD_EIGENVALUES 9

typedef struct bg_record {
  int d;
  double gamma;
  double alpha;
  double V;
  int N;
  int p;
  char backend[8];
  char method[12];
  int M;
  double gap;
  int gap_exists;
  double eig[BG_RECORD_EIGENVALUES]; /* first d+6 eigenvalues, NaN past that */
  int zeros;
  double t_asm;
  double t_eig;
  int64_t kernel_evaluations;
  int64_t angular_integrals;
  int64_t angular_failures;
  double max_angular_error;
  double max_asymmetry;
} bg_record;

typedef struct bg_config bg_config;
typedef struct bg_results bg_results;

/* Called once per finished record (failure == NULL) or failed point (record == NULL). */
typedef void (*bg_progress_fn)(const bg_record* record, const char* failure, void* user);

BG_API const char* bg_version(void);
BG_API const char* bg_last_error(void);
BG_API const char* bg_status_name(bg_status status);

BG_API bg_status bg_config_create(bg_config** out);
BG_API void bg_config_destroy(bg_config* cfg);
/* key is a CLI flag name without dashes ("gamma", "V", "fixed-dv", ...). */
BG_API bg_status bg_config_set(bg_config* cfg, const char* key, const char* value);
/* Copies the current value (set syntax) into buf, truncating to len - 1 chars. */
BG_API bg_status bg_config_get(const bg_config* cfg, const char* key, char* buf, size_t len);
BG_API bg_status bg_config_load(bg_config* cfg, const char* path);
BG_API bg_status bg_config_validate(const bg_config* cfg);

/* Returns BG_OK, BG_POINT_FAILED (results still valid) or an error. */
BG_API bg_status bg_run(const bg_config* cfg, bg_progress_fn progress, void* user, bg_results** out);
BG_API void bg_results_destroy(bg_results* res);
BG_API size_t bg_results_count(const bg_results* res);
BG_API size_t bg_results_failures(const bg_results* res);
BG_API size_t bg_results_skipped(const bg_results* res);
BG_API bg_status bg_results_get(const bg_results* res, size_t i, bg_record* out);
BG_API const char* bg_results_failure(const bg_results* res, size_t i);
/* format: "csv" or "json" */
BG_API bg_status bg_results_write(const bg_results* res, const char* format, const char* path);

/* Single point convenience: gap of one (V, N) run with the current config. */
BG_API bg_status bg_gap(const bg_config* cfg, double V, int N, double* gap);

#ifdef __cplusplus
}
#endif

#endif
