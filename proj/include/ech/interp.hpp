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

// Continuous reconstruction of a collocation solution, local error analysis
// and mesh refinement.

#pragma once

#include <iosfwd>
#include <vector>

#include "ech/ipm.hpp"
#include "ech/mesh.hpp"
#include "ech/ocp.hpp"
#include "ech/transcription.hpp"

namespace ech {

struct MultiplierSample {
  int node = 0;
  double t = 0.0;
  double value = 0.0;
  bool operator==(const MultiplierSample&) const = default;
};

/// Raw path-constraint multipliers, one sequence per constraint, over the
/// nodes where that row was implemented. Times are strictly increasing.
struct MultiplierField {
  std::vector<std::vector<MultiplierSample>> constraints;
  bool operator==(const MultiplierField&) const = default;
};

struct DiscreteSolution {
  Mesh mesh = Mesh::uniform(1);
  double t0 = 0.0;
  double tf = 1.0;
  Mat X;  // N x n
  Mat U;  // N x m
  Vec p;
  /// f(X_i, U_i, t_i, p) at every node; may be empty.
  Mat state_derivatives;
  MultiplierField multipliers;

  double node_time(int node) const { return t0 + mesh.node_tau(node) * (tf - t0); }
};

/// Solution tuple of a solved transcription, with multipliers mapped back
/// through the row map.
DiscreteSolution discrete_solution(const DiscretizedNlp& nlp, const NlpSolution& sol);

/// Piecewise polynomial reconstruction. On each interval the state is the
/// cubic through the three node values whose end slopes best match the
/// node derivatives (a quadratic when none are stored); the input is the
/// quadratic through its three node values.
class Interpolant {
 public:
  explicit Interpolant(const DiscreteSolution& sol);

  double t0() const { return t0_; }
  double tf() const { return tf_; }
  const Vec& parameters() const { return p_; }
  int num_intervals() const { return static_cast<int>(h_.size()); }
  double interval_start(int k) const { return starts_[k]; }
  double interval_end(int k) const { return starts_[k] + h_[k]; }

  Vec state(double t) const;
  Vec state_derivative(double t) const;
  Vec input(double t) const;

 private:
  int locate(double t) const;

  double t0_, tf_;
  Vec p_;
  std::vector<double> starts_, h_;
  // Per interval: coefficient matrix rows c0..c3 in local s in [0, 1].
  std::vector<Mat> xc_, uc_;
};

Interpolant interpolate(const DiscreteSolution& sol);

struct ErrorOptions {
  int samples_per_interval = 10;
  double eta_tol = 1e-5;
  double eps_tol = 1e-4;
};

struct ErrorReport {
  double eta_tol = 0.0;
  double eps_tol = 0.0;
  int samples_per_interval = 0;
  /// Dense grid shared by all intervals, K * samples + 1 points.
  std::vector<double> sample_times;
  /// Interval of each sample (boundary samples belong to the left interval,
  /// except the first one).
  std::vector<int> sample_interval;
  /// Raw constraint values c_l at the samples, n_g x samples.
  Mat constraint_samples;
  /// eta per interval and state, K x n.
  Mat eta;
  /// Largest max(0, c_l) per interval and constraint, K x n_g.
  Mat interval_violation;

  int num_intervals() const { return static_cast<int>(eta.rows()); }
  double interval_eta(int k) const;
  double interval_max_violation(int k) const;
  double max_eta() const;
  double max_violation() const;
  bool eta_ok(int k) const { return interval_eta(k) <= eta_tol; }
  bool violation_ok(int k) const { return interval_max_violation(k) <= eps_tol; }
  bool passes() const { return max_eta() <= eta_tol && max_violation() <= eps_tol; }
};

ErrorReport error_analysis(const OcpProblem& prob, const DiscreteSolution& sol,
                           const Interpolant& interp, const ErrorOptions& opts = {});

/// Plain-text table: one line per interval.
void write_error_report(std::ostream& out, const ErrorReport& report);

struct RefineOptions {
  int max_split = 5;
  int max_total_intervals = 4096;
};

/// Splits every interval whose eta exceeds the tolerance into
/// min(ceil((eta / eta_tol)^(1/5)), max_split) equal parts; intervals whose
/// constraint violation v exceeds its tolerance get at least
/// min(max(2, ceil((v / eps_tol)^(1/2))), max_split) parts.
Mesh refine_mesh(const Mesh& mesh, const ErrorReport& report, const RefineOptions& opts = {});

/// Interpolant values at the nodes of `mesh`, clipped into the simple bounds.
NodeValues resample(const OcpProblem& prob, const Interpolant& interp, const Mesh& mesh);

}  // namespace ech
