/* SPDX-License-Identifier: Apache-2.0 */
#ifndef NATCLOCK_H
#define NATCLOCK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NC_API __declspec(dllexport)
#else
#define NC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nc_status {
  NC_OK = 0,
  NC_INVALID_ARGUMENT = 1,
  NC_UNSUPPORTED = 2,
  NC_DECOUPLING_VIOLATION = 3,
  NC_INFINITE_MEAN = 4,
  NC_CONFIG = 5,
  NC_IO = 6,
  NC_INTERNAL = 99
} nc_status;

typedef enum nc_envelope_kind { NC_ENVELOPE_A = 0, NC_ENVELOPE_KAPPA = 1, NC_ENVELOPE_ETA = 2 } nc_envelope_kind;

typedef enum nc_verdict { NC_PASS = 0, NC_FAIL = 1, NC_INCONCLUSIVE = 2, NC_NOT_APPLICABLE = 3 } nc_verdict;

typedef struct nc_process nc_process;
typedef struct nc_grid nc_grid;
typedef struct nc_config nc_config;
typedef struct nc_result nc_result;

typedef struct nc_flags {
  int nonnegative;
  int continuous_paths;
  int markov;
  int submartingale;
  int upper_bound_claimed;
  int sharpness_witness;
} nc_flags;

NC_API const char* nc_version(void);
/* Message for the last failed call on this thread; "" after success. */
NC_API const char* nc_last_error(void);
NC_API const char* nc_status_name(nc_status status);
/* Text table of the process catalogue; valid until the next call on this thread. */
NC_API const char* nc_zoo_table(void);

NC_API nc_status nc_process_parse(const char* spec, nc_process** out);
NC_API void nc_process_free(nc_process* process);
/* Owned by the handle. */
NC_API const char* nc_process_describe(const nc_process* process);
NC_API nc_status nc_process_flags(const nc_process* process, nc_flags* out);

NC_API nc_status nc_grid_parse(const char* spec, nc_grid** out);
NC_API nc_status nc_grid_uniform(double t_max, size_t n, nc_grid** out);
NC_API nc_status nc_grid_geometric(double t_min, double t_max, size_t n, nc_grid** out);
NC_API void nc_grid_free(nc_grid* grid);
NC_API size_t nc_grid_size(const nc_grid* grid);
NC_API const double* nc_grid_times(const nc_grid* grid);

/* Fills out[0..size) with path path_index of the given seed. */
NC_API nc_status nc_sample_path(const nc_process* process, const nc_grid* grid, uint64_t seed, uint64_t path_index,
                                double* out, size_t size);
/* When the path never reaches r, tau is the last grid time and censored is 1. */
NC_API nc_status nc_first_crossing(const nc_grid* grid, const double* values, size_t size, double r, double* tau,
                                   int* censored);
/* values and se must hold nc_grid_size(grid) doubles; se may be NULL. */
NC_API nc_status nc_estimate_envelope(const nc_process* process, const nc_grid* grid, size_t n_paths,
                                      nc_envelope_kind kind, uint64_t seed, unsigned workers, double* values,
                                      double* se);
/* taus and censored hold n_paths entries; censored may be NULL. */
NC_API nc_status nc_hitting_times(const nc_process* process, const nc_grid* grid, double r, size_t n_paths,
                                  uint64_t seed, unsigned workers, double* taus, int* censored);
/* Smallest t with curve(t) >= xi by linear interpolation; +inf if never. */
NC_API nc_status nc_invert_monotone(const nc_grid* grid, const double* curve, size_t size, double xi, double* t);

NC_API nc_status nc_config_create(nc_config** out);
NC_API nc_status nc_config_from_json(const char* json, nc_config** out);
NC_API void nc_config_free(nc_config* config);
NC_API nc_status nc_config_add_process(nc_config* config, const char* spec);
NC_API nc_status nc_config_set_grid(nc_config* config, const char* spec);
NC_API nc_status nc_config_set_envelope_grid(nc_config* config, const char* spec);
NC_API nc_status nc_config_set_levels(nc_config* config, const double* levels, size_t count);
NC_API nc_status nc_config_set_paths(nc_config* config, size_t n_paths);
NC_API nc_status nc_config_set_envelope_paths(nc_config* config, size_t n_paths);
NC_API nc_status nc_config_set_seed(nc_config* config, uint64_t seed);
/* Comma-separated check names, or "all". */
NC_API nc_status nc_config_set_checks(nc_config* config, const char* checks);
NC_API nc_status nc_config_set_out(nc_config* config, const char* dir);
NC_API nc_status nc_config_set_workers(nc_config* config, unsigned workers);
NC_API nc_status nc_config_set_d(nc_config* config, const int* d, size_t count);
NC_API nc_status nc_config_set_z_crit(nc_config* config, double z_crit);
NC_API const char* nc_config_out(const nc_config* config);
/* Owned by the handle; valid until the next call on it. */
NC_API const char* nc_config_to_json(nc_config* config);
NC_API nc_status nc_config_validate(const nc_config* config);

/* command: zoo, estimate, hit, bounds, table1, report. */
NC_API nc_status nc_run(const nc_config* config, const char* command, nc_result** out);
/* Async-signal-safe. Running and later runs stop between jobs until cleared. */
NC_API void nc_cancel(void);
NC_API void nc_cancel_clear(void);

NC_API void nc_result_free(nc_result* result);
NC_API size_t nc_result_file_count(const nc_result* result);
NC_API const char* nc_result_file_name(const nc_result* result, size_t index);
NC_API const char* nc_result_file_data(const nc_result* result, size_t index, size_t* size);
NC_API int nc_result_any_fail(const nc_result* result);
NC_API int nc_result_complete(const nc_result* result);
NC_API size_t nc_result_verdict_count(const nc_result* result, nc_verdict verdict);
NC_API const char* nc_result_summary(const nc_result* result);
NC_API size_t nc_result_warning_count(const nc_result* result);
NC_API const char* nc_result_warning(const nc_result* result, size_t index);
NC_API nc_status nc_result_write(const nc_result* result, const char* dir);

#ifdef __cplusplus
}
#endif

#endif
