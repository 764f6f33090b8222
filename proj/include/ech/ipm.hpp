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

// Primal-dual interior-point solver for Nlp.
//
// Inequalities g(z) <= 0 become g(z) + s = 0 with s > 0; finite simple bounds
// carry their own multipliers. Each iteration solves the symmetric
// quasi-definite system
//
//   [ W + Sigma_x + dw I   J_E^T         J_I^T          ] [dz  ]
//   [ J_E                  -dc I         0              ] [dlam]
//   [ J_I                  0             -S Lambda^-1   ] [dLam]
//
// with a sparse LDL^T factorization, raising dw until the inertia is
// (n, m_E + m_I, 0). Steps are cut by the fraction-to-boundary rule and an
// Armijo backtracking search on an l1 exact-penalty merit function. The
// barrier parameter follows mu <- max(mu_min, min(kappa mu, mu^theta)).
//
// Multiplier convention: grad f + J_E^T lam + J_I^T Lam - z_L + z_U = 0,
// with Lam, z_L, z_U >= 0.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "ech/nlp.hpp"

namespace ech {

enum class SolveStatus { Optimal, MaxIter, RestorationFailed, InfeasibleDetected };

std::string to_string(SolveStatus status);

struct KktResiduals {
  double stationarity = 0.0;     // scaled infinity norm of the Lagrangian gradient
  double primal = 0.0;           // max(|h|, |g + s|)
  double dual = 0.0;             // largest negative multiplier magnitude
  double complementarity = 0.0;  // scaled max |s Lam|, |d z|
};

struct NlpSolution {
  Vec z;
  Vec eq_multipliers;
  Vec ineq_multipliers;
  Vec lower_bound_multipliers;  // zero where the bound is infinite
  Vec upper_bound_multipliers;
  Vec slacks;
  double objective = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  KktResiduals kkt;
  int iterations = 0;
  int restorations = 0;
  double wall_time = 0.0;  // seconds
  double final_mu = 0.0;
};

struct WarmStart {
  Vec primal;
  std::optional<Vec> eq_multipliers;
  std::optional<Vec> ineq_multipliers;
  std::optional<Vec> slacks;
  std::optional<Vec> lower_bound_multipliers;
  std::optional<Vec> upper_bound_multipliers;
};

struct SolverOptions {
  double tol_kkt = 1e-8;
  double tol_primal = 1e-8;
  /// Minimum initial slack and bound distance.
  double slack_min = 1e-2;
  /// Push used instead of slack_min when the warm start carries slacks and
  /// multipliers.
  double warm_slack_min = 1e-8;
  double mult_min = 1e-6;
  int max_iter = 500;
  double mu_init = 0.1;
  double mu_linear_decrease = 0.2;       // kappa
  double mu_superlinear_power = 1.5;     // theta
  double barrier_tol_factor = 10.0;      // subproblem solved when E_mu <= factor * mu
  double fraction_to_boundary = 0.995;
  double armijo = 1e-4;
  double reg_init = 1e-8;
  double reg_growth = 10.0;
  double reg_max = 1e20;
  int line_search_failures_before_restoration = 3;
  bool enable_restoration = true;
  int max_restorations = 3;
  /// Tab-separated per-iteration log; nothing is written when null.
  std::ostream* log = nullptr;
};

/// Strictly interior starting point.
struct InteriorPoint {
  Vec z;
  Vec slacks;
  Vec eq_multipliers;
  Vec ineq_multipliers;
  Vec lower_bound_multipliers;
  Vec upper_bound_multipliers;
  double mu = 0.1;
};

/// Multipliers (lam, Lam) minimizing
/// || grad f + J_E^T lam + J_I^T Lam - z_L + z_U ||^2 + damping ||(lam, Lam)||^2.
Vec least_squares_multipliers(const Nlp& nlp, const Vec& z, const Vec& z_lower,
                              const Vec& z_upper, double damping = 1e-10);

/// Moves z strictly inside its finite bounds by push * max(1, |bound|),
/// limited to push * (upper - lower). This is the primal start of solve().
Vec push_into_bounds(const Nlp& nlp, Vec z, double push);

InteriorPoint initialize(const Nlp& nlp, const WarmStart& warm, const SolverOptions& opts);

NlpSolution solve(const Nlp& nlp, const WarmStart& warm, const SolverOptions& opts = {});

/// Header of the per-iteration log.
inline constexpr const char* kIpmLogHeader = "iter\tobjective\tinf_pr\tinf_du\tmu\talpha_pr";

}  // namespace ech
