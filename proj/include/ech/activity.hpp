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

// Constraint activity classification from multipliers and interpolated
// constraint values, and the activation filters derived from it.

#pragma once

#include <vector>

#include "ech/interp.hpp"
#include "ech/ocp.hpp"
#include "ech/transcription.hpp"

namespace ech {

/// Maps each sequence to [0, 1] by (v - min) / (max - min). Sequences whose
/// range is at most 1e-12 * (1 + max) map to zeros.
std::vector<double> normalize(const std::vector<double>& values);
MultiplierField normalize(const MultiplierField& field);

/// Sum of squared deviations from the mean over values[begin, end).
double segment_sse(const std::vector<double>& values, int begin, int end);

/// Piecewise-constant-mean segmentation by binary segmentation with an SSE
/// cost and a linear penalty per changepoint. The greedy split hierarchy is
/// grown to completion and the prefix with the smallest penalized cost is
/// returned. Result: sorted start indices of every segment but the first.
std::vector<int> detect_changepoints(const std::vector<double>& values, double penalty);

/// Penalized cost of a segmentation given by its changepoints.
double segmentation_cost(const std::vector<double>& values, const std::vector<int>& changepoints,
                         double penalty);

/// 0.1 * length * variance.
double default_changepoint_penalty(const std::vector<double>& values);

struct SegmentedProfile {
  std::vector<int> nodes;          // implemented nodes, increasing
  std::vector<double> raw;
  std::vector<double> normalized;
  std::vector<int> changepoints;   // indices into `nodes`
  std::vector<double> segment_means;
  std::vector<bool> segment_active;
};

enum class SetVerdict { PotentiallyRedundant, PotentiallyEnforced };

struct ActivityOptions {
  double zeta = 0.1;
  double eps_tol = 1e-4;
  /// Negative selects default_changepoint_penalty per constraint.
  double penalty = -1.0;
  int samples_per_interval = 10;
  /// Raw multipliers below max(abs, rel * largest path multiplier) are
  /// treated as zero before normalization.
  double multiplier_floor_rel = 1e-6;
  double multiplier_floor_abs = 1e-10;
};

struct ActivityReport {
  double t0 = 0.0;
  double tf = 1.0;
  bool fixed_terminal_time = true;
  std::vector<double> node_times;
  /// Per constraint: node-level flags (criterion a or b).
  std::vector<std::vector<bool>> active;
  std::vector<std::vector<bool>> active_by_violation;
  std::vector<std::vector<bool>> active_by_multiplier;
  /// Per constraint: minimal closed spans covering runs of flagged nodes.
  std::vector<std::vector<TimeInterval>> intervals;
  std::vector<SegmentedProfile> profiles;
  /// Per constraint set.
  std::vector<SetVerdict> verdicts;
  /// Row to set map copied from the problem.
  std::vector<int> set_of_row;

  int num_active_nodes(int set) const;
};

ActivityReport classify(const OcpProblem& prob, const DiscreteSolution& sol, const Interpolant& interp,
                        const ActivityOptions& opts = {});

/// Buffered filter: each interval grows by beta on both sides (clamped to the
/// horizon) and overlapping intervals merge. Redundant sets get NONE, and
/// enforced sets of free-terminal-time problems get ALL. A buffer covering
/// the whole horizon restores every row.
ActivationFilter buffer_intervals(const ActivityReport& report, double beta);

/// Union of the row filters of one set, as a RowFilter.
RowFilter set_filter(const ActivationFilter& filter, const OcpProblem& prob, int set);

enum class ReactivationKind { NoChange, WithinBuffer, AfpRequired };

struct Reactivation {
  ReactivationKind kind = ReactivationKind::NoChange;
  std::vector<std::string> reasons;
};

/// Compares a new report against the filter implemented in the previous
/// solve. AFP is required when a removed set becomes enforced, or when a new
/// activation interval reaches outside the previously buffered coverage.
Reactivation detect_reactivation(const ActivationFilter& previous, const ActivityReport& report,
                                 double beta);

}  // namespace ech
