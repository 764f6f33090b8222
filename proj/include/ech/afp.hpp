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

// Auxiliary feasibility problem: the transcription with its cost replaced by
// the total slack, and every implemented path row c_l(node) <= 0 relaxed to
// c_l(node) <= s_l with one slack per constraint function, s >= 0.

#pragma once

#include <memory>

#include "ech/ipm.hpp"
#include "ech/transcription.hpp"

namespace ech {

class AfpNlp : public Nlp {
 public:
  /// `prob` must outlive the object. `anchor` is the point of the proximal term.
  AfpNlp(const OcpProblem& prob, const Mesh& mesh, const ActivationFilter& filter, Vec anchor,
         double proximal);

  int num_variables() const override { return base_.num_variables() + ng_; }
  int num_equalities() const override { return base_.num_equalities(); }
  int num_inequalities() const override { return base_.num_inequalities(); }
  Vec lower_bounds() const override;
  Vec upper_bounds() const override;
  double objective(const Vec& w) const override;
  Vec objective_gradient(const Vec& w) const override;
  Vec equalities(const Vec& w) const override;
  Vec inequalities(const Vec& w) const override;
  SpMat equality_jacobian(const Vec& w) const override;
  SpMat inequality_jacobian(const Vec& w) const override;
  SpMat lagrangian_hessian(const Vec& w, double obj_factor, const Vec& eq_mult,
                           const Vec& ineq_mult) const override;

  const DiscretizedNlp& base() const { return base_; }
  int num_slacks() const { return ng_; }
  Vec primal(const Vec& w) const { return w.head(base_.num_variables()); }
  Vec slacks(const Vec& w) const { return w.tail(ng_); }
  Vec join(const Vec& z, const Vec& s) const;

 private:
  DiscretizedNlp base_;
  int ng_;
  Vec anchor_;
  double proximal_;
};

struct AfpOptions {
  /// Primal push into the simple bounds; also used as the solver's slack_min.
  double push = 1e-2;
  /// Added to max_i s_hat to make the initial point strictly interior.
  double padding = 1e-2;
  double proximal = 1e-2;
  double feas_tol = 1e-6;
};

struct AfpProblem {
  std::shared_ptr<AfpNlp> nlp;
  /// Starting primal of the transcription (warm start clipped into bounds).
  Vec start;
  /// Per node and constraint: |min(-c, 0)| at the start, N x n_g, zero at
  /// nodes where the row is not implemented.
  Mat s_hat;
  /// Initial slack per constraint.
  Vec s_bar;
  AfpOptions options;
};

/// Throws Error if the starting point does not satisfy c_l <= s_bar_l
/// strictly at every implemented row.
AfpProblem build_afp(const OcpProblem& prob, const Mesh& mesh, const ActivationFilter& filter,
                     const NodeValues& warm, const AfpOptions& opts = {});

/// Largest c_l(node) - s_bar_l over the implemented rows at the start point.
double afp_initial_margin(const AfpProblem& afp);

struct AfpResult {
  NlpSolution solution;
  NodeValues values;
  Vec slacks;
  /// Optimal total slack.
  double j_star = 0.0;
  bool feasible = false;
  /// Largest implemented row of the original transcription at the result.
  double max_row = 0.0;
};

AfpResult solve_afp(const AfpProblem& afp, const SolverOptions& opts = {});

}  // namespace ech
