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

// Benchmark runs, text and CSV reports, the JSON run record and the
// key = value configuration file.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "ech/bench.hpp"
#include "ech/ech.hpp"

namespace ech {

struct RunOptions {
  bool run_standard = true;
  bool run_ech = true;
  /// Each pipeline is run this many times; reported wall times are minima.
  int timing_repeats = 1;
  int trajectory_samples = 201;
};

struct PipelineReport {
  std::string name;
  bool ok = false;
  std::string message;
  bool converged = false;
  double total_time = 0.0;
  double recompute_time = 0.0;
  int mr_iterations = 0;
  double objective = 0.0;
  int final_intervals = 0;
  int final_inequality_rows = 0;
  int afp_invocations = 0;
  std::vector<IterationRecord> history;
  /// cells[set][iteration], see history_cell.
  std::vector<std::vector<std::string>> cells;
  /// Columns: t, states, inputs.
  Mat trajectory;

  bool operator==(const PipelineReport& o) const;
};

struct RunReport {
  BenchProblemSpec spec;
  EchConfig config;
  std::vector<std::string> set_names;
  std::vector<std::string> trajectory_columns;
  bool has_standard = false;
  bool has_ech = false;
  PipelineReport standard;
  PipelineReport ech;
  /// |J_ech - J_std| / |J_std| when both pipelines succeeded, else -1.
  double objective_rel_diff = -1.0;
  bool objectives_agree = false;

  bool operator==(const RunReport& o) const;
};

inline constexpr double kObjectiveAgreementTol = 1e-4;

/// Runs one pipeline on a bench problem. Failures yield ok == false and the
/// history up to the failure.
PipelineReport run_pipeline(const BenchProblem& bench, const EchConfig& cfg, bool constraint_handling,
                            const RunOptions& opts = {});

RunReport run_comparison(const BenchProblem& bench, const EchConfig& cfg, const RunOptions& opts = {});

/// Writes history.txt, comparison.txt, trajectory_<pipeline>.csv, nfz.csv
/// and run_record.json. Throws IoError when the directory is unusable.
void emit_reports(const RunReport& report, const std::string& out_dir);

std::string history_table(const RunReport& report, const PipelineReport& pipeline);
std::string comparison_table(const RunReport& report);

std::string to_json(const RunReport& report);
RunReport run_report_from_json(const std::string& text);
void save_run_record(const RunReport& report, const std::string& path);
RunReport load_run_record(const std::string& path);

/// Flat "section.key" -> value map read from a key = value file with
/// [section] headers. Throws IoError or InvalidArgument.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies one "section.key" setting. Throws InvalidArgument for unknown
/// keys or malformed values.
void apply_setting(const std::string& key, const std::string& value, BenchProblemSpec& spec,
                   EchConfig& cfg, RunOptions& opts);

/// Keys accepted by apply_setting.
std::vector<std::string> setting_keys();

}  // namespace ech
