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

// Mesh-refinement driver with external constraint handling.
//
// Iteration 1 solves the full transcription. Every later iteration analyzes
// the previous solution, refines the mesh, drops the constraint sets judged
// redundant, restricts the others to buffered activation intervals (fixed
// terminal time only), optionally solves the auxiliary feasibility problem
// and re-solves from the resampled solution.

#pragma once

#include <string>
#include <vector>

#include "ech/activity.hpp"
#include "ech/afp.hpp"
#include "ech/errors.hpp"
#include "ech/interp.hpp"
#include "ech/ipm.hpp"

namespace ech {

enum class AfpPolicy { Strict, Practical };
enum class BetaMode { Fixed, Adaptive };

std::string to_string(AfpPolicy policy);
std::string to_string(BetaMode mode);
AfpPolicy afp_policy_from_string(const std::string& text);
BetaMode beta_mode_from_string(const std::string& text);

struct EchConfig {
  /// False runs the standard pipeline: every row at every iteration, no AFP.
  bool constraint_handling = true;
  double zeta = 0.1;
  /// Seconds; negative selects 0.1 * (tf - t0).
  double beta = -1.0;
  BetaMode beta_mode = BetaMode::Fixed;
  double eps_tol = 1e-4;
  double eta_tol = 1e-5;
  int max_mr_iterations = 8;
  AfpPolicy afp_policy = AfpPolicy::Practical;
  int samples_per_interval = 10;
  /// Negative selects the default changepoint penalty.
  double penalty = -1.0;
  RefineOptions refine;
  SolverOptions solver;
  AfpOptions afp;
  /// Repeated fresh solves whose minimum is the re-computation time.
  int recompute_repeats = 3;

  /// Throws InvalidArgument.
  void validate() const;
  bool operator==(const EchConfig& o) const;
};

struct IterationRecord {
  int iteration = 0;
  int intervals = 0;
  int nodes = 0;
  /// Filter implemented in this iteration's NLP.
  ActivationFilter filter;
  int inequality_rows = 0;
  SolveStatus status = SolveStatus::Optimal;
  int nlp_iterations = 0;
  double nlp_time = 0.0;
  double objective = 0.0;
  double max_eta = 0.0;
  double max_violation = 0.0;
  std::vector<SetVerdict> verdicts;
  ReactivationKind reactivation = ReactivationKind::NoChange;
  std::vector<std::string> reactivation_reasons;
  double beta = 0.0;
  bool afp_invoked = false;
  double afp_j_star = 0.0;
  int afp_iterations = 0;
  /// Largest c_l - s_bar_l at the AFP start; negative when strictly feasible.
  double afp_start_margin = 0.0;
  /// Largest implemented row at the OCP warm start; only set after the first
  /// iteration.
  bool warm_start_checked = false;
  double warm_start_violation = 0.0;

  bool operator==(const IterationRecord&) const = default;
};

struct EchState {
  int iteration = 0;
  Mesh mesh = Mesh::uniform(1);
  ActivationFilter filter;
  ActivationFilter previous_filter;
  DiscreteSolution solution;
  ErrorReport errors;
  ActivityReport activity;
  int afp_invocations = 0;
  double beta = 0.0;
  std::vector<IterationRecord> history;
  bool converged = false;
  /// Warm start of the last OCP solve.
  Vec final_warm_start;
};

struct EchResult {
  DiscreteSolution solution;
  EchState state;
  double total_time = 0.0;
};

/// Thrown when a solve fails or an AFP proves the mesh infeasible. The state
/// up to the failure is attached.
class PipelineError : public Error {
 public:
  PipelineError(const std::string& what, EchState state) : Error(what), state_(std::move(state)) {}
  const EchState& state() const { return state_; }

 private:
  EchState state_;
};

/// `guess` holds node values on `initial_mesh`.
EchResult run(const OcpProblem& prob, const Mesh& initial_mesh, const NodeValues& guess,
              const EchConfig& cfg);

/// Minimum wall time of fresh solves of the final NLP (final mesh and filter)
/// from the final warm start.
double recompute_time(const OcpProblem& prob, const EchState& state, const EchConfig& cfg);

/// Table layout: one row per constraint set, one column per iteration;
/// entries are "∅", "[a b]" intervals or "[t0, tf]".
std::string history_cell(const ActivationFilter& filter, const OcpProblem& prob, int set, double t0,
                         double tf);

}  // namespace ech
