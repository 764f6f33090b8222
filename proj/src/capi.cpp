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


#include "ech/ech_c.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "ech/report.hpp"

struct ech_config {
  ech::BenchProblemSpec spec = ech::default_nfz5_spec();
  ech::EchConfig cfg;
  ech::RunOptions opts;
};

struct ech_report {
  ech::RunReport report;
  std::string text;
};

namespace {

thread_local std::string g_last_error;

ech_status fail(ech_status status, const std::string& what) {
  g_last_error = what;
  return status;
}

template <class F>
ech_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const ech::InvalidArgument& e) {
    return fail(ECH_ERR_INVALID_ARGUMENT, e.what());
  } catch (const ech::IoError& e) {
    return fail(ECH_ERR_IO, e.what());
  } catch (const ech::Error& e) {
    return fail(ECH_ERR_PIPELINE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ECH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ECH_ERR_INTERNAL, e.what());
  }
}

const ech::PipelineReport* pick(const ech_report* r, ech_pipeline p) {
  if (p == ECH_PIPELINE_STANDARD) return r->report.has_standard ? &r->report.standard : nullptr;
  if (p == ECH_PIPELINE_ECH) return r->report.has_ech ? &r->report.ech : nullptr;
  return nullptr;
}

}  // namespace

extern "C" {

const char* ech_last_error(void) { return g_last_error.c_str(); }

const char* ech_status_string(ech_status status) {
  switch (status) {
    case ECH_OK: return "ok";
    case ECH_ERR_NULL_ARGUMENT: return "null argument";
    case ECH_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ECH_ERR_IO: return "i/o error";
    case ECH_ERR_PIPELINE: return "pipeline failure";
    case ECH_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ech_status ech_config_create(ech_config** out) {
  if (!out) return fail(ECH_ERR_NULL_ARGUMENT, "out is null");
  return guarded([&] {
    *out = new ech_config;
    return ECH_OK;
  });
}

void ech_config_destroy(ech_config* config) { delete config; }

ech_status ech_config_load_file(ech_config* config, const char* path) {
  if (!config || !path) return fail(ECH_ERR_NULL_ARGUMENT, "config or path is null");
  return guarded([&] {
    ech_config tmp = *config;
    for (const auto& [k, v] : ech::read_config_file(path)) ech::apply_setting(k, v, tmp.spec, tmp.cfg, tmp.opts);
    *config = std::move(tmp);
    return ECH_OK;
  });
}

ech_status ech_config_set(ech_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return fail(ECH_ERR_NULL_ARGUMENT, "config, key or value is null");
  return guarded([&] {
    ech::apply_setting(key, value, config->spec, config->cfg, config->opts);
    return ECH_OK;
  });
}

size_t ech_config_key_count(void) { return ech::setting_keys().size(); }

const char* ech_config_key(size_t index) {
  static const std::vector<std::string> keys = ech::setting_keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

ech_status ech_run(const ech_config* config, ech_run_mode mode, ech_report** out) {
  if (!config || !out) return fail(ECH_ERR_NULL_ARGUMENT, "config or out is null");
  if (mode != ECH_RUN_STANDARD && mode != ECH_RUN_ECH && mode != ECH_RUN_BOTH)
    return fail(ECH_ERR_INVALID_ARGUMENT, "unknown run mode");
  *out = nullptr;
  return guarded([&] {
    config->cfg.validate();
    ech::RunOptions opts = config->opts;
    opts.run_standard = (mode & ECH_RUN_STANDARD) != 0;
    opts.run_ech = (mode & ECH_RUN_ECH) != 0;
    const ech::BenchProblem bench = ech::bench_nfz5(config->spec);
    auto rep = std::make_unique<ech_report>();
    rep->report = ech::run_comparison(bench, config->cfg, opts);
    const auto& r = rep->report;
    *out = rep.release();
    std::string failures;
    if (r.has_standard && !r.standard.ok) failures += "standard: " + r.standard.message;
    if (r.has_ech && !r.ech.ok) failures += (failures.empty() ? "" : "; ") + ("ech: " + r.ech.message);
    return failures.empty() ? ECH_OK : fail(ECH_ERR_PIPELINE, failures);
  });
}

ech_status ech_report_load(const char* path, ech_report** out) {
  if (!path || !out) return fail(ECH_ERR_NULL_ARGUMENT, "path or out is null");
  *out = nullptr;
  return guarded([&] {
    auto rep = std::make_unique<ech_report>();
    rep->report = ech::load_run_record(path);
    *out = rep.release();
    return ECH_OK;
  });
}

ech_status ech_report_save(const ech_report* report, const char* path) {
  if (!report || !path) return fail(ECH_ERR_NULL_ARGUMENT, "report or path is null");
  return guarded([&] {
    ech::save_run_record(report->report, path);
    return ECH_OK;
  });
}

ech_status ech_report_emit(const ech_report* report, const char* out_dir) {
  if (!report || !out_dir) return fail(ECH_ERR_NULL_ARGUMENT, "report or out_dir is null");
  return guarded([&] {
    ech::emit_reports(report->report, out_dir);
    return ECH_OK;
  });
}

void ech_report_destroy(ech_report* report) { delete report; }

int ech_report_has_pipeline(const ech_report* report, ech_pipeline pipeline) {
  return report && pick(report, pipeline) ? 1 : 0;
}

ech_status ech_report_metric(const ech_report* report, ech_pipeline pipeline, ech_metric metric, double* value) {
  if (!report || !value) return fail(ECH_ERR_NULL_ARGUMENT, "report or value is null");
  const ech::PipelineReport* p = pick(report, pipeline);
  if (!p) return fail(ECH_ERR_INVALID_ARGUMENT, "pipeline not present in report");
  switch (metric) {
    case ECH_METRIC_TOTAL_TIME: *value = p->total_time; break;
    case ECH_METRIC_RECOMPUTE_TIME: *value = p->recompute_time; break;
    case ECH_METRIC_OBJECTIVE: *value = p->objective; break;
    case ECH_METRIC_MR_ITERATIONS: *value = p->mr_iterations; break;
    case ECH_METRIC_FINAL_INTERVALS: *value = p->final_intervals; break;
    case ECH_METRIC_FINAL_INEQUALITY_ROWS: *value = p->final_inequality_rows; break;
    case ECH_METRIC_AFP_INVOCATIONS: *value = p->afp_invocations; break;
    case ECH_METRIC_OK: *value = p->ok ? 1.0 : 0.0; break;
    case ECH_METRIC_CONVERGED: *value = p->converged ? 1.0 : 0.0; break;
    default: return fail(ECH_ERR_INVALID_ARGUMENT, "unknown metric");
  }
  return ECH_OK;
}

ech_status ech_report_message(ech_report* report, ech_pipeline pipeline, const char** text) {
  if (!report || !text) return fail(ECH_ERR_NULL_ARGUMENT, "report or text is null");
  const ech::PipelineReport* p = pick(report, pipeline);
  if (!p) return fail(ECH_ERR_INVALID_ARGUMENT, "pipeline not present in report");
  report->text = p->message;
  *text = report->text.c_str();
  return ECH_OK;
}

ech_status ech_report_objective_rel_diff(const ech_report* report, double* value, int* agree) {
  if (!report || !value) return fail(ECH_ERR_NULL_ARGUMENT, "report or value is null");
  *value = report->report.objective_rel_diff;
  if (agree) *agree = report->report.objectives_agree ? 1 : 0;
  return ECH_OK;
}

ech_status ech_report_history_table(ech_report* report, ech_pipeline pipeline, const char** text) {
  if (!report || !text) return fail(ECH_ERR_NULL_ARGUMENT, "report or text is null");
  const ech::PipelineReport* p = pick(report, pipeline);
  if (!p) return fail(ECH_ERR_INVALID_ARGUMENT, "pipeline not present in report");
  return guarded([&] {
    report->text = ech::history_table(report->report, *p);
    *text = report->text.c_str();
    return ECH_OK;
  });
}

ech_status ech_report_comparison_table(ech_report* report, const char** text) {
  if (!report || !text) return fail(ECH_ERR_NULL_ARGUMENT, "report or text is null");
  if (!report->report.has_standard || !report->report.has_ech)
    return fail(ECH_ERR_INVALID_ARGUMENT, "comparison needs both pipelines");
  return guarded([&] {
    report->text = ech::comparison_table(report->report);
    *text = report->text.c_str();
    return ECH_OK;
  });
}

}  // extern "C"
