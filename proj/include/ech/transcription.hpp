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

// Hermite-Simpson transcription of an OcpProblem into a sparse NLP.
//
// Decision vector layout: X (node-major, N x n), U (N x m), p (s), then tf
// when the terminal time is free. Equalities are, per interval k, the
// Hermite interpolation defect
//
//   X_mid - (X_k + X_{k+1}) / 2 - h_k / 8 * (f_k - f_{k+1})
//
// followed by the Simpson defect
//
//   X_{k+1} - X_k - h_k / 6 * (f_k + 4 f_mid + f_{k+1}),
//
// and finally the boundary conditions. Inequalities are path-constraint rows
// at the nodes admitted by the ActivationFilter.

#pragma once

#include <iosfwd>
#include <vector>

#include "ech/mesh.hpp"
#include "ech/nlp.hpp"
#include "ech/ocp.hpp"

namespace ech {

struct TimeInterval {
  double start = 0.0;
  double end = 0.0;

  bool contains(double t) const { return t >= start && t <= end; }
  bool operator==(const TimeInterval&) const = default;
};

/// Where the rows of one path constraint are generated.
struct RowFilter {
  enum class Kind { All, None, Intervals };
  Kind kind = Kind::All;
  /// Sorted, disjoint, closed intervals in seconds. Only used for Kind::Intervals.
  std::vector<TimeInterval> intervals;

  static RowFilter all() { return {Kind::All, {}}; }
  static RowFilter none() { return {Kind::None, {}}; }
  static RowFilter within(std::vector<TimeInterval> intervals);

  bool admits(double t) const;
  bool operator==(const RowFilter&) const = default;
};

/// One RowFilter per path-constraint row.
struct ActivationFilter {
  std::vector<RowFilter> rows;

  static ActivationFilter all(int constraints);
  static ActivationFilter none(int constraints);

  /// Throws InvalidArgument for unsorted, overlapping or out-of-horizon intervals.
  void validate(int constraints, double t0, double tf) const;
  bool operator==(const ActivationFilter&) const = default;
};

/// A retained inequality row: constraint index and node index.
struct PathRow {
  int constraint = 0;
  int node = 0;
  bool operator==(const PathRow&) const = default;
};

/// Node values of a discretized trajectory.
struct NodeValues {
  Mat X;  // N x n
  Mat U;  // N x m
  Vec p;
  double tf = 0.0;
};

class DiscretizedNlp : public Nlp {
 public:
  /// `prob` must outlive the transcription.
  DiscretizedNlp(const OcpProblem& prob, Mesh mesh, ActivationFilter filter);

  int num_variables() const override { return num_vars_; }
  int num_equalities() const override { return num_eq_; }
  int num_inequalities() const override { return static_cast<int>(row_map_.size()); }
  Vec lower_bounds() const override;
  Vec upper_bounds() const override;
  double objective(const Vec& z) const override;
  Vec objective_gradient(const Vec& z) const override;
  Vec equalities(const Vec& z) const override;
  Vec inequalities(const Vec& z) const override;
  SpMat equality_jacobian(const Vec& z) const override;
  SpMat inequality_jacobian(const Vec& z) const override;
  SpMat lagrangian_hessian(const Vec& z, double obj_factor, const Vec& eq_mult,
                           const Vec& ineq_mult) const override;

  /// Hermite and Simpson defect rows (the first 2 K n equalities).
  Vec defect_residuals(const Vec& z) const;

  const OcpProblem& problem() const { return *prob_; }
  const Mesh& mesh() const { return mesh_; }
  const ActivationFilter& filter() const { return filter_; }
  const std::vector<PathRow>& row_map() const { return row_map_; }
  int num_nodes() const { return mesh_.num_nodes(); }
  bool free_terminal_time() const { return free_tf_; }

  /// Simpson weights on normalized time; multiply by (tf - t0) for seconds.
  const Vec& quadrature_weights() const { return weights_; }
  double node_time(int node, double tf) const;
  /// Node times for the nominal (or fixed) terminal time.
  std::vector<double> nominal_node_times() const;

  Vec pack(const NodeValues& values) const;
  NodeValues unpack(const Vec& z) const;
  double terminal_time(const Vec& z) const;

  int x_index(int node, int j) const { return node * n_ + j; }
  int u_index(int node, int j) const { return N_ * n_ + node * m_ + j; }
  int p_index(int j) const { return N_ * (n_ + m_) + j; }
  int tf_index() const { return N_ * (n_ + m_) + s_; }

 private:
  NodePoint node_point(const Vec& z, int node, double tf) const;
  BoundaryPoint boundary_point(const Vec& z, double tf) const;
  /// Global column of local node-argument column q, or -1 when it is fixed.
  int node_column(int node, int q) const;
  int boundary_column(int q) const;

  const OcpProblem* prob_;
  Mesh mesh_;
  ActivationFilter filter_;
  int n_, m_, s_, N_, K_;
  bool free_tf_;
  double t0_;
  int num_vars_;
  int num_eq_;
  Vec weights_;
  std::vector<PathRow> row_map_;
};

DiscretizedNlp transcribe(const OcpProblem& prob, const Mesh& mesh,
                          const ActivationFilter& filter);

/// Free-function form of DiscretizedNlp::defect_residuals.
Vec defect_residuals(const DiscretizedNlp& nlp, const Vec& z);

/// Writes "row col value" lines for every stored entry.
void write_sparsity(std::ostream& out, const SpMat& matrix);

}  // namespace ech
