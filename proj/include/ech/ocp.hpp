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

// Continuous-time optimal control problems in Bolza form:
//
//   min  Phi(x(t0), t0, x(tf), tf, p) + int_{t0}^{tf} L(x, u, t, p) dt
//   s.t. xdot = f(x, u, t, p)
//        c(x, u, t, p) <= 0
//        phi(x(t0), t0, x(tf), tf, p) = 0
//        simple bounds on x, u, p and tf.

#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace ech {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Arguments of a function evaluated at one time instance.
/// Derivative columns are ordered (x, u, p, t).
struct NodePoint {
  Vec x;
  Vec u;
  Vec p;
  double t = 0.0;
};

/// Arguments of the endpoint functions (Mayer cost, boundary conditions).
/// Derivative columns are ordered (x0, t0, xf, tf, p).
struct BoundaryPoint {
  Vec x0;
  double t0 = 0.0;
  Vec xf;
  double tf = 0.0;
  Vec p;
};

/// A vector-valued user function with optional analytic derivatives.
/// Missing derivatives are approximated by central finite differences.
template <class Point>
struct VectorFunction {
  int outputs = 0;
  std::function<Vec(const Point&)> value;
  /// outputs x packed-size matrix.
  std::function<Mat(const Point&)> jacobian;
  /// sum_k w_k * Hessian(value_k), packed-size square matrix.
  std::function<Mat(const Point&, const Vec& weights)> hessian;

  bool defined() const { return static_cast<bool>(value); }
};

using NodeFunction = VectorFunction<NodePoint>;
using BoundaryFunction = VectorFunction<BoundaryPoint>;

struct Bounds {
  Vec lower;
  Vec upper;
};

struct TimeMode {
  bool fixed_terminal_time = true;
  double t0 = 0.0;
  /// Terminal time when fixed; initial guess when free.
  double tf = 1.0;
  double tf_lower = 0.0;
  double tf_upper = 1.0;
};

/// Rows of the path-constraint vector that form one logical constraint
/// (for instance one no-fly zone).
struct ConstraintSet {
  std::string id;
  std::vector<int> rows;
  std::string label;
};

struct OcpDefinition {
  int state_dim = 0;
  int input_dim = 0;
  int param_dim = 0;
  NodeFunction dynamics;
  NodeFunction path_constraints;  // c <= 0 is feasible
  NodeFunction lagrange_cost;     // 1 output
  BoundaryFunction mayer_cost;    // 1 output
  BoundaryFunction boundary;      // phi = 0
  Bounds state_bounds;
  Bounds input_bounds;
  Bounds param_bounds;
  TimeMode time;
  /// Defaults to one set per path-constraint row when empty.
  std::vector<ConstraintSet> constraint_sets;
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;
};

/// Validated, immutable OCP. Safe to share between threads.
class OcpProblem {
 public:
  explicit OcpProblem(OcpDefinition def);

  int state_dim() const { return def_.state_dim; }
  int input_dim() const { return def_.input_dim; }
  int param_dim() const { return def_.param_dim; }
  int num_path_constraints() const { return def_.path_constraints.outputs; }
  int num_boundary_conditions() const { return def_.boundary.outputs; }
  /// Size of a packed NodePoint: n + m + s + 1.
  int node_arg_size() const { return state_dim() + input_dim() + param_dim() + 1; }
  int boundary_arg_size() const { return 2 * state_dim() + param_dim() + 2; }

  const NodeFunction& dynamics() const { return def_.dynamics; }
  const NodeFunction& path_constraints() const { return def_.path_constraints; }
  const NodeFunction& lagrange_cost() const { return def_.lagrange_cost; }
  const BoundaryFunction& mayer_cost() const { return def_.mayer_cost; }
  const BoundaryFunction& boundary() const { return def_.boundary; }
  const Bounds& state_bounds() const { return def_.state_bounds; }
  const Bounds& input_bounds() const { return def_.input_bounds; }
  const Bounds& param_bounds() const { return def_.param_bounds; }
  const TimeMode& time() const { return def_.time; }
  const std::vector<ConstraintSet>& constraint_sets() const { return def_.constraint_sets; }
  const std::vector<std::string>& state_names() const { return def_.state_names; }
  const std::vector<std::string>& input_names() const { return def_.input_names; }
  /// Index of the set that owns path-constraint row `row`.
  int set_of_row(int row) const { return row_to_set_[row]; }

 private:
  OcpDefinition def_;
  std::vector<int> row_to_set_;
};

// Packing helpers for derivative evaluation.
Vec pack(const NodePoint& point);
NodePoint unpack_node(const Vec& packed, int n, int m, int s);
Vec pack(const BoundaryPoint& point);
BoundaryPoint unpack_boundary(const Vec& packed, int n, int s);

/// Value with a finiteness check on inputs and outputs.
Vec evaluate(const NodeFunction& fn, const NodePoint& point, const char* what);
Vec evaluate(const BoundaryFunction& fn, const BoundaryPoint& point, const char* what);

/// Analytic Jacobian when provided, otherwise central differences with a
/// relative step of 1e-6.
Mat jacobian(const NodeFunction& fn, const NodePoint& point);
Mat jacobian(const BoundaryFunction& fn, const BoundaryPoint& point);

/// sum_k w_k * Hessian(fn_k). Falls back to differencing the Jacobian.
Mat weighted_hessian(const NodeFunction& fn, const NodePoint& point, const Vec& weights);
Mat weighted_hessian(const BoundaryFunction& fn, const BoundaryPoint& point,
                     const Vec& weights);

Vec evaluate_dynamics(const OcpProblem& prob, const Vec& x, const Vec& u, double t,
                      const Vec& p);
Vec evaluate_path_constraints(const OcpProblem& prob, const Vec& x, const Vec& u, double t,
                              const Vec& p);

}  // namespace ech
