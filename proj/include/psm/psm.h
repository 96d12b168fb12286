// Copyright 2026 The psm Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the psm library.
 *
 * Objects are opaque handles created by psm_*_create / psm_*_sample and
 * released with the matching psm_*_destroy. Functions return a psm_status;
 * on failure psm_last_error() describes the error for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * psm_string_free. */

#ifndef PSM_PSM_H_
#define PSM_PSM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PSM_BUILDING_LIBRARY)
#define PSM_API __declspec(dllexport)
#else
#define PSM_API __declspec(dllimport)
#endif
#else
#define PSM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum psm_status {
  PSM_OK = 0,
  PSM_ERR_CONFIG = 2,
  PSM_ERR_BUDGET = 3,
  PSM_ERR_CROSSVAL = 4,
  PSM_ERR_IO = 5,
  PSM_ERR_INTERNAL = 6
} psm_status;

typedef enum psm_variant { PSM_ARBITRARY = 0, PSM_CONSECUTIVE = 1 } psm_variant;
typedef enum psm_placement { PSM_UNIFORM = 0, PSM_SEPARATED = 1 } psm_placement;
typedef enum psm_boundary { PSM_LINEAR = 0, PSM_CYCLIC = 1 } psm_boundary;
typedef enum psm_format { PSM_FORMAT_CSV = 0, PSM_FORMAT_JSON = 1 } psm_format;

typedef struct psm_model_params {
  int n;
  int k;
  int m;
  double lambda;
  psm_variant variant;
  psm_placement placement;
  psm_boundary boundary;
} psm_model_params;

typedef struct psm_model psm_model;
typedef struct psm_support psm_support;
typedef struct psm_observation psm_observation;
typedef struct psm_experiment psm_experiment;

PSM_API const char* psm_version(void);
PSM_API const char* psm_last_error(void);
PSM_API void psm_string_free(char* s);

/* Fills params with n = k = m = 1, lambda = 0, consecutive, uniform, linear. */
PSM_API void psm_model_params_default(psm_model_params* params);
/* Variant/placement/boundary names as accepted by the CLI. */
PSM_API psm_status psm_parse_variant(const char* name, psm_variant* out);
PSM_API psm_status psm_parse_placement(const char* name, psm_placement* out);
PSM_API psm_status psm_parse_boundary(const char* name, psm_boundary* out);

PSM_API psm_status psm_model_create(const psm_model_params* params, psm_model** out);
PSM_API void psm_model_destroy(psm_model* model);

/* Support sampled from RandomStream(seed). */
PSM_API psm_status psm_support_sample(const psm_model* model, uint64_t seed,
                                      psm_support** out);
PSM_API psm_status psm_support_from_json(const psm_model* model, const char* json,
                                         psm_support** out);
PSM_API psm_status psm_support_to_json(const psm_support* support, char** out_json);
PSM_API void psm_support_destroy(psm_support* support);

/* Alternative draw: support then observation from RandomStream(seed). The
 * support is returned through out_support when it is non-NULL. */
PSM_API psm_status psm_observation_sample(const psm_model* model, uint64_t seed,
                                          psm_observation** out,
                                          psm_support** out_support);
/* Null draw (pure noise) from RandomStream(seed). */
PSM_API psm_status psm_observation_null(int n, uint64_t seed, psm_observation** out);
/* Copies n*n row-major values. */
PSM_API psm_status psm_observation_create(int n, const double* data,
                                          psm_observation** out);
PSM_API psm_status psm_observation_read(const char* path, psm_observation** out);
/* path NULL or "-" writes to stdout. */
PSM_API psm_status psm_observation_write(const psm_observation* x, const char* path,
                                         int binary);
PSM_API int psm_observation_size(const psm_observation* x);
PSM_API const double* psm_observation_data(const psm_observation* x);
PSM_API void psm_observation_destroy(psm_observation* x);

/* test: "sum", "scan_sd" or "scan_csd". Result JSON:
 * {test, statistic, threshold, decision, corner?}. */
PSM_API psm_status psm_detect(const psm_observation* x, const psm_model* model,
                              const char* test, double delta, char** out_json);

/* estimator: "ml", "peel" or "modified_peel". truth may be NULL; when given,
 * the result carries exact and overlap_cells. */
PSM_API psm_status psm_recover(const psm_observation* x, int k, int m,
                               const char* estimator, const psm_support* truth,
                               char** out_json);

/* task: "detect_sum", "detect_scan_sd", "detect_scan_csd", "recover_ml",
 * "recover_peel" or "recover_modified_peel". */
PSM_API psm_status psm_experiment_create(const psm_model* model, const char* task,
                                         int64_t trials, uint64_t seed, double delta,
                                         psm_experiment** out);
PSM_API void psm_experiment_destroy(psm_experiment* experiment);
PSM_API psm_status psm_experiment_set_threads(psm_experiment* experiment, int threads);
/* axis: "lambda", "k", "m" or "n". Integer axes reject non-integral values. */
PSM_API psm_status psm_experiment_set_grid(psm_experiment* experiment, const char* axis,
                                           const double* values, size_t count);
/* Comma-separated task names; empty string clears the list. */
PSM_API psm_status psm_experiment_set_tasks(psm_experiment* experiment,
                                            const char* tasks);
/* Single estimate (grid ignored) as JSON. */
PSM_API psm_status psm_experiment_run_estimate(const psm_experiment* experiment,
                                               char** out_json);
/* Full sweep rendered as CSV or JSON. Row errors do not stop the sweep; the
 * text is always returned and the status is that of the first failed row. */
PSM_API psm_status psm_experiment_run_sweep(const psm_experiment* experiment,
                                            psm_format format, char** out_text);

/* Threshold table as JSON. */
PSM_API psm_status psm_theory(int n, int k, int m, double lambda, double delta,
                              int paper_chi2, char** out_json);

/* Cross-validation report as JSON; PSM_ERR_CROSSVAL (with the report still
 * returned) when any suite fails. */
PSM_API psm_status psm_crossval(int n_max, int64_t matrices, uint64_t seed,
                                char** out_json);

/* Writes text to path, or stdout when path is NULL or "-". */
PSM_API psm_status psm_write_file(const char* path, const char* text);

#ifdef __cplusplus
}
#endif

#endif /* PSM_PSM_H_ */
