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

#include "ech/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "ech/errors.hpp"

namespace ech {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void fill_bounds(Bounds& b, int dim, const char* what) {
  if (b.lower.size() == 0) b.lower = Vec::Constant(dim, -kInf);
  if (b.upper.size() == 0) b.upper = Vec::Constant(dim, kInf);
  if (b.lower.size() != dim || b.upper.size() != dim) {
    throw DimensionError(std::string(what) + " bounds have the wrong length");
  }
  for (int i = 0; i < dim; ++i) {
    if (!(b.lower[i] <= b.upper[i])) {
      throw InvalidArgument(std::string(what) + " lower bound exceeds upper bound at " +
                            std::to_string(i));
    }
  }
}

template <class Point>
void check_outputs(const Vec& v, int expected, const char* what) {
  if (v.size() != expected) {
    throw DimensionError(std::string(what) + " returned " + std::to_string(v.size()) +
                         " values, expected " + std::to_string(expected));
  }
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw EvaluationError(std::string(what) + " is not finite", i);
  }
}

void check_inputs(const Vec& packed, const char* what) {
  for (int i = 0; i < packed.size(); ++i) {
    if (!std::isfinite(packed[i])) {
      throw EvaluationError(std::string(what) + " received a non-finite argument", i);
    }
  }
}

template <class Point, class Unpack>
Mat fd_jacobian(const VectorFunction<Point>& fn, const Vec& packed, Unpack unpack) {
  Mat jac(fn.outputs, packed.size());
  Vec probe = packed;
  for (int j = 0; j < packed.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(packed[j]));
    probe[j] = packed[j] + h;
    const Vec plus = fn.value(unpack(probe));
    probe[j] = packed[j] - h;
    const Vec minus = fn.value(unpack(probe));
    probe[j] = packed[j];
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

template <class Point, class Unpack>
Mat fd_hessian(const VectorFunction<Point>& fn, const Vec& packed, const Vec& weights,
               Unpack unpack) {
  const int d = static_cast<int>(packed.size());
  const double rel = fn.jacobian ? 1e-6 : 1e-4;
  auto jac = [&](const Vec& v) -> Mat {
    return fn.jacobian ? fn.jacobian(unpack(v)) : fd_jacobian(fn, v, unpack);
  };
  Mat hess(d, d);
  Vec probe = packed;
  for (int j = 0; j < d; ++j) {
    const double h = rel * std::max(1.0, std::abs(packed[j]));
    probe[j] = packed[j] + h;
    const Vec plus = jac(probe).transpose() * weights;
    probe[j] = packed[j] - h;
    const Vec minus = jac(probe).transpose() * weights;
    probe[j] = packed[j];
    hess.col(j) = (plus - minus) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

NodeFunction zero_scalar_node() {
  NodeFunction fn;
  fn.outputs = 1;
  fn.value = [](const NodePoint&) { return Vec::Zero(1); };
  fn.jacobian = [](const NodePoint& pt) {
    return Mat::Zero(1, pt.x.size() + pt.u.size() + pt.p.size() + 1);
  };
  fn.hessian = [](const NodePoint& pt, const Vec&) {
    const auto d = pt.x.size() + pt.u.size() + pt.p.size() + 1;
    return Mat::Zero(d, d);
  };
  return fn;
}

template <class Point>
VectorFunction<Point> empty_function(int packed) {
  VectorFunction<Point> fn;
  fn.outputs = 0;
  fn.value = [](const Point&) { return Vec(0); };
  fn.jacobian = [packed](const Point&) { return Mat(0, packed); };
  fn.hessian = [packed](const Point&, const Vec&) { return Mat::Zero(packed, packed); };
  return fn;
}

}  // namespace

OcpProblem::OcpProblem(OcpDefinition def) : def_(std::move(def)) {
  const int n = def_.state_dim, m = def_.input_dim, s = def_.param_dim;
  if (n <= 0) throw InvalidArgument("state_dim must be positive");
  if (m <= 0) throw InvalidArgument("input_dim must be positive");
  if (s < 0) throw InvalidArgument("param_dim must be nonnegative");
  if (!def_.dynamics.defined()) throw InvalidArgument("dynamics are required");
  if (def_.dynamics.outputs != n) {
    throw DimensionError("dynamics must have state_dim outputs");
  }
  const int node_size = n + m + s + 1;
  const int bnd_size = 2 * n + s + 2;
  if (!def_.path_constraints.defined()) {
    def_.path_constraints = empty_function<NodePoint>(node_size);
  }
  if (!def_.boundary.defined()) def_.boundary = empty_function<BoundaryPoint>(bnd_size);
  if (!def_.lagrange_cost.defined()) def_.lagrange_cost = zero_scalar_node();
  if (def_.lagrange_cost.outputs != 1) throw DimensionError("lagrange cost must be scalar");
  if (!def_.mayer_cost.defined()) {
    def_.mayer_cost.outputs = 1;
    def_.mayer_cost.value = [](const BoundaryPoint&) { return Vec::Zero(1); };
    def_.mayer_cost.jacobian = [bnd_size](const BoundaryPoint&) {
      return Mat::Zero(1, bnd_size);
    };
    def_.mayer_cost.hessian = [bnd_size](const BoundaryPoint&, const Vec&) {
      return Mat::Zero(bnd_size, bnd_size);
    };
  }
  if (def_.mayer_cost.outputs != 1) throw DimensionError("mayer cost must be scalar");

  fill_bounds(def_.state_bounds, n, "state");
  fill_bounds(def_.input_bounds, m, "input");
  fill_bounds(def_.param_bounds, s, "parameter");

  auto& tm = def_.time;
  if (tm.fixed_terminal_time) {
    if (!(tm.tf > tm.t0)) throw InvalidArgument("tf must exceed t0");
  } else {
    if (!(tm.tf_lower <= tm.tf_upper)) throw InvalidArgument("tf bounds are inverted");
    if (!(tm.tf_lower > tm.t0)) throw InvalidArgument("tf lower bound must exceed t0");
    tm.tf = std::clamp(tm.tf, tm.tf_lower, tm.tf_upper);
  }

  const int ng = def_.path_constraints.outputs;
  if (def_.constraint_sets.empty()) {
    for (int l = 0; l < ng; ++l) {
      def_.constraint_sets.push_back(
          {std::to_string(l + 1), {l}, "constraint " + std::to_string(l + 1)});
    }
  }
  row_to_set_.assign(ng, -1);
  for (int k = 0; k < static_cast<int>(def_.constraint_sets.size()); ++k) {
    for (int row : def_.constraint_sets[k].rows) {
      if (row < 0 || row >= ng) throw InvalidArgument("constraint set row out of range");
      if (row_to_set_[row] != -1) {
        throw InvalidArgument("constraint sets overlap at row " + std::to_string(row));
      }
      row_to_set_[row] = k;
    }
  }
  for (int l = 0; l < ng; ++l) {
    if (row_to_set_[l] == -1) {
      throw InvalidArgument("path constraint row " + std::to_string(l) +
                            " belongs to no constraint set");
    }
  }
}

Vec pack(const NodePoint& pt) {
  Vec v(pt.x.size() + pt.u.size() + pt.p.size() + 1);
  v << pt.x, pt.u, pt.p, pt.t;
  return v;
}

NodePoint unpack_node(const Vec& v, int n, int m, int s) {
  NodePoint pt;
  pt.x = v.segment(0, n);
  pt.u = v.segment(n, m);
  pt.p = v.segment(n + m, s);
  pt.t = v[n + m + s];
  return pt;
}

Vec pack(const BoundaryPoint& pt) {
  Vec v(2 * pt.x0.size() + pt.p.size() + 2);
  v << pt.x0, pt.t0, pt.xf, pt.tf, pt.p;
  return v;
}

BoundaryPoint unpack_boundary(const Vec& v, int n, int s) {
  BoundaryPoint pt;
  pt.x0 = v.segment(0, n);
  pt.t0 = v[n];
  pt.xf = v.segment(n + 1, n);
  pt.tf = v[2 * n + 1];
  pt.p = v.segment(2 * n + 2, s);
  return pt;
}

Vec evaluate(const NodeFunction& fn, const NodePoint& pt, const char* what) {
  check_inputs(pack(pt), what);
  Vec out = fn.value(pt);
  check_outputs<NodePoint>(out, fn.outputs, what);
  return out;
}

Vec evaluate(const BoundaryFunction& fn, const BoundaryPoint& pt, const char* what) {
  check_inputs(pack(pt), what);
  Vec out = fn.value(pt);
  check_outputs<BoundaryPoint>(out, fn.outputs, what);
  return out;
}

Mat jacobian(const NodeFunction& fn, const NodePoint& pt) {
  if (fn.jacobian) return fn.jacobian(pt);
  const int n = static_cast<int>(pt.x.size()), m = static_cast<int>(pt.u.size()),
            s = static_cast<int>(pt.p.size());
  return fd_jacobian(fn, pack(pt), [=](const Vec& v) { return unpack_node(v, n, m, s); });
}

Mat jacobian(const BoundaryFunction& fn, const BoundaryPoint& pt) {
  if (fn.jacobian) return fn.jacobian(pt);
  const int n = static_cast<int>(pt.x0.size()), s = static_cast<int>(pt.p.size());
  return fd_jacobian(fn, pack(pt), [=](const Vec& v) { return unpack_boundary(v, n, s); });
}

Mat weighted_hessian(const NodeFunction& fn, const NodePoint& pt, const Vec& w) {
  if (fn.hessian) return fn.hessian(pt, w);
  const int n = static_cast<int>(pt.x.size()), m = static_cast<int>(pt.u.size()),
            s = static_cast<int>(pt.p.size());
  return fd_hessian(fn, pack(pt), w, [=](const Vec& v) { return unpack_node(v, n, m, s); });
}

Mat weighted_hessian(const BoundaryFunction& fn, const BoundaryPoint& pt, const Vec& w) {
  if (fn.hessian) return fn.hessian(pt, w);
  const int n = static_cast<int>(pt.x0.size()), s = static_cast<int>(pt.p.size());
  return fd_hessian(fn, pack(pt), w, [=](const Vec& v) { return unpack_boundary(v, n, s); });
}

namespace {

NodePoint checked_point(const OcpProblem& prob, const Vec& x, const Vec& u, double t,
                        const Vec& p) {
  if (x.size() != prob.state_dim() || u.size() != prob.input_dim() ||
      p.size() != prob.param_dim()) {
    throw DimensionError("point dimensions do not match the problem");
  }
  return NodePoint{x, u, p, t};
}

}  // namespace

Vec evaluate_dynamics(const OcpProblem& prob, const Vec& x, const Vec& u, double t,
                      const Vec& p) {
  return evaluate(prob.dynamics(), checked_point(prob, x, u, t, p), "dynamics");
}

Vec evaluate_path_constraints(const OcpProblem& prob, const Vec& x, const Vec& u, double t,
                              const Vec& p) {
  return evaluate(prob.path_constraints(), checked_point(prob, x, u, t, p),
                  "path constraints");
}

}  // namespace ech
