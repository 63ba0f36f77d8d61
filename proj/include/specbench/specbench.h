/* specbench C API.
 *
 * All functions return an sb_status. On failure, sb_last_error() returns a
 * message for the calling thread that stays valid until the next API call on
 * that thread. Strings returned through char** are owned by the caller and
 * released with sb_string_free.
 */
#ifndef SPECBENCH_SPECBENCH_H
#define SPECBENCH_SPECBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SB_API __declspec(dllexport)
#else
#define SB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sb_status {
  SB_OK = 0,
  SB_ERR_INVALID_ARGUMENT = 1,
  SB_ERR_IO = 2,
  SB_ERR_SCHEMA = 3,
  SB_ERR_UNSUPPORTED_SAMPLING_MODE = 4,
  SB_ERR_MISSING_BASELINE = 5,
  SB_ERR_EMPTY_DATASTORE = 6,
  SB_ERR_CONTEXT_TOO_LONG = 7,
  SB_ERR_MISSING_PREVIOUS_ANSWER = 8,
  SB_ERR_INVALID_PROPOSAL = 9,
  SB_ERR_INTERNAL = 100
} sb_status;

typedef struct sb_config sb_config;
typedef struct sb_results sb_results;

SB_API const char* sb_version(void);
SB_API const char* sb_last_error(void);
SB_API const char* sb_status_name(sb_status status);
SB_API void sb_string_free(char* s);

/* Config. Relative paths inside the file resolve against its directory. */
SB_API sb_status sb_config_load(const char* path, sb_config** out);
SB_API sb_status sb_config_parse(const char* json, const char* base_dir, sb_config** out);
SB_API void sb_config_free(sb_config* cfg);

SB_API sb_status sb_config_set_method(sb_config* cfg, const char* method);
SB_API sb_status sb_config_set_temperature(sb_config* cfg, double temperature);
SB_API sb_status sb_config_set_rounds(sb_config* cfg, size_t rounds);
SB_API sb_status sb_config_set_bon_n(sb_config* cfg, size_t n);
SB_API sb_status sb_config_set_seed(sb_config* cfg, uint64_t seed);
SB_API sb_status sb_config_set_output(sb_config* cfg, const char* dir);
/* Pointer stays valid until the config is modified or freed. */
SB_API sb_status sb_config_output(const sb_config* cfg, const char** out);
SB_API sb_status sb_config_to_json(const sb_config* cfg, char** out);

/* Structural checks, capability matrix, and dataset ingestion. Dataset
 * warnings (if any) come back newline-separated in *warnings when non-null. */
SB_API sb_status sb_config_validate(const sb_config* cfg, char** warnings);

/* Runs the configured method. With with_baseline != 0 the paired
 * autoregressive baseline is run first so metrics can be computed. */
SB_API sb_status sb_run(const sb_config* cfg, int with_baseline, sb_results** out);
SB_API sb_status sb_run_baseline(const sb_config* cfg, sb_results** out);

SB_API sb_status sb_results_write(const sb_results* res, const char* dir);
SB_API sb_status sb_results_load(const char* dir, sb_results** out);
/* Appends the runs of `other` to `into`. Duplicate run ids are rejected. */
SB_API sb_status sb_results_merge(sb_results* into, const sb_results* other);
SB_API sb_status sb_results_run_count(const sb_results* res, size_t* out);
/* Aggregated metrics in the report-data format. */
SB_API sb_status sb_results_report_data(const sb_results* res, char** out);
SB_API void sb_results_free(sb_results* res);

#ifdef __cplusplus
}
#endif

#endif /* SPECBENCH_SPECBENCH_H */
