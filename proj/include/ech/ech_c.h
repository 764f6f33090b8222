// Copyright 2026 The ECH Collocation Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the benchmark driver.
 *
 * Handles are opaque and owned by the caller; every function that can fail
 * returns an ech_status and leaves a message for ech_last_error() on the
 * calling thread. Strings returned through `const char**` stay valid until
 * the handle is destroyed or the same getter is called again. */

#ifndef ECH_ECH_C_H
#define ECH_ECH_C_H

#include <stddef.h>

#if defined(_WIN32)
#define ECH_API __declspec(dllexport)
#else
#define ECH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ech_config ech_config;
typedef struct ech_report ech_report;

typedef enum {
  ECH_OK = 0,
  ECH_ERR_NULL_ARGUMENT = 1,
  ECH_ERR_INVALID_ARGUMENT = 2,
  ECH_ERR_IO = 3,
  /* A pipeline failed; the report is still produced when an out handle was given. */
  ECH_ERR_PIPELINE = 4,
  ECH_ERR_INTERNAL = 5
} ech_status;

typedef enum { ECH_PIPELINE_STANDARD = 0, ECH_PIPELINE_ECH = 1 } ech_pipeline;

typedef enum {
  ECH_RUN_STANDARD = 1,
  ECH_RUN_ECH = 2,
  ECH_RUN_BOTH = 3
} ech_run_mode;

typedef enum {
  ECH_METRIC_TOTAL_TIME = 0,
  ECH_METRIC_RECOMPUTE_TIME = 1,
  ECH_METRIC_OBJECTIVE = 2,
  ECH_METRIC_MR_ITERATIONS = 3,
  ECH_METRIC_FINAL_INTERVALS = 4,
  ECH_METRIC_FINAL_INEQUALITY_ROWS = 5,
  ECH_METRIC_AFP_INVOCATIONS = 6,
  ECH_METRIC_OK = 7,
  ECH_METRIC_CONVERGED = 8
} ech_metric;

ECH_API const char* ech_last_error(void);
ECH_API const char* ech_status_string(ech_status status);

/* Configuration: bench problem parameters, pipeline settings, run options. */
ECH_API ech_status ech_config_create(ech_config** out);
ECH_API void ech_config_destroy(ech_config* config);
/* Applies every "section.key" entry of a key = value file. */
ECH_API ech_status ech_config_load_file(ech_config* config, const char* path);
ECH_API ech_status ech_config_set(ech_config* config, const char* key, const char* value);
ECH_API size_t ech_config_key_count(void);
ECH_API const char* ech_config_key(size_t index);

/* Runs the selected pipelines on the configured bench problem. */
ECH_API ech_status ech_run(const ech_config* config, ech_run_mode mode, ech_report** out);

ECH_API ech_status ech_report_load(const char* path, ech_report** out);
ECH_API ech_status ech_report_save(const ech_report* report, const char* path);
ECH_API ech_status ech_report_emit(const ech_report* report, const char* out_dir);
ECH_API void ech_report_destroy(ech_report* report);

ECH_API int ech_report_has_pipeline(const ech_report* report, ech_pipeline pipeline);
ECH_API ech_status ech_report_metric(const ech_report* report, ech_pipeline pipeline, ech_metric metric,
                                     double* value);
ECH_API ech_status ech_report_message(ech_report* report, ech_pipeline pipeline, const char** text);
/* Relative objective difference, or -1 when not both pipelines succeeded. */
ECH_API ech_status ech_report_objective_rel_diff(const ech_report* report, double* value, int* agree);
ECH_API ech_status ech_report_history_table(ech_report* report, ech_pipeline pipeline, const char** text);
ECH_API ech_status ech_report_comparison_table(ech_report* report, const char** text);

#ifdef __cplusplus
}
#endif

#endif /* ECH_ECH_C_H */
