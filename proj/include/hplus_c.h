/**
 * Copyright 2026 The hplus Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of libhplus. Every function returns an hp_status; on failure
 * hp_last_error() describes the problem for the calling thread. Strings
 * returned through char** are owned by the caller and released with
 * hp_string_free. */

#ifndef HPLUS_C_H_
#define HPLUS_C_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HP_API __declspec(dllexport)
#else
#define HP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hp_status {
  HP_OK = 0,
  HP_EMPTY_SELECTION = 1,
  HP_DIMENSION_MISMATCH = 2,
  HP_INVALID_RATIO = 3,
  HP_INSUFFICIENT_CLIENTS = 4,
  HP_INVALID_REFERENCE = 5,
  HP_INVALID_SELECTION_SIZE = 6,
  HP_MISSING_REFERENCE = 7,
  HP_INFEASIBLE_PARTITION = 8,
  HP_FORMAT_ERROR = 9,
  HP_CONFIG_ERROR = 10,
  HP_IO_ERROR = 11,
  HP_EMPTY_PLOT = 12,
  HP_DIVERGENCE_DETECTED = 13,
  HP_INVALID_ARGUMENT = 14,
  HP_INTERNAL = 15
} hp_status;

typedef struct hp_config hp_config;
typedef struct hp_sweep_result hp_sweep_result;

HP_API const char *hp_version(void);
HP_API const char *hp_status_name(hp_status status);
/* Message of the last failure on this thread; "" after a success. */
HP_API const char *hp_last_error(void);
/* Field path of the last ConfigError on this thread, else "". */
HP_API const char *hp_last_error_detail(void);
HP_API void hp_string_free(char *s);

/* ---- configuration ---- */
HP_API hp_status hp_config_load(const char *path, hp_config **out);
HP_API hp_status hp_config_from_json(const char *json_text, hp_config **out);
HP_API hp_status hp_config_to_json(const hp_config *config, char **out);
HP_API hp_status hp_config_cell_count(const hp_config *config, size_t *out);
HP_API void hp_config_free(hp_config *config);

/* ---- sweeps ---- */
typedef struct hp_sweep_options {
  size_t parallelism;     /* 0 or 1: sequential */
  int resume;             /* non-zero: reuse finished cells */
  const char *output_dir; /* NULL: BYZ_BENCH_OUT, then the config value */
} hp_sweep_options;

/* Receives each finished row as a JSON object; calls are serialized. */
typedef void (*hp_row_callback)(const char *row_json, void *user);

HP_API hp_status hp_sweep_run(const hp_config *config, const hp_sweep_options *options, hp_row_callback on_row,
                              void *user, hp_sweep_result **out);
HP_API size_t hp_sweep_row_count(const hp_sweep_result *result);
HP_API hp_status hp_sweep_row_json(const hp_sweep_result *result, size_t index, char **out);
HP_API size_t hp_sweep_computed(const hp_sweep_result *result);
HP_API size_t hp_sweep_reused(const hp_sweep_result *result);
HP_API int hp_sweep_any_failed(const hp_sweep_result *result);
HP_API const char *hp_sweep_output_dir(const hp_sweep_result *result);
HP_API void hp_sweep_result_free(hp_sweep_result *result);

/* ---- plots ---- */
/* Max accuracy against Byzantine ratio, one line per method. */
HP_API hp_status hp_plot_summary(const char *summary_json_path, const char *svg_path);
/* Test accuracy against round, one line per round CSV. labels may be NULL. */
HP_API hp_status hp_plot_rounds(const char *const *csv_paths, const char *const *labels, size_t count,
                                const char *svg_path);

/* ---- numerics ----
 * Uploads are row-major, one row of length p per client. Weights may be NULL
 * for uniform weights and are renormalized otherwise. */
HP_API hp_status hp_h_check(const double *x, const double *y, size_t p, double *out);

/* name: Mean, Median, Krum, GM, MCA, CClip or FLTrust (case-insensitive).
 * reference is required for FLTrust and used as the CClip centre when given. */
HP_API hp_status hp_aggregate(const char *name, const double *uploads, const double *weights, size_t num_clients,
                              size_t p, const double *reference, double *out);

typedef struct hp_filter_params {
  size_t passes;         /* K */
  size_t segment_length; /* r */
  size_t keep;           /* N */
  double penalty_weight; /* rho */
  double norm_pivot;     /* tau */
} hp_filter_params;

/* selected_out receives num_clients flags (1 = in the intersection) and may
 * be NULL, as may empty_intersection_out. */
HP_API hp_status hp_filter_run(const double *reference, const double *uploads, const double *weights,
                               size_t num_clients, size_t p, const hp_filter_params *params, uint64_t seed,
                               double *aggregate_out, unsigned char *selected_out, int *empty_intersection_out);

#ifdef __cplusplus
}
#endif

#endif /* HPLUS_C_H_ */
